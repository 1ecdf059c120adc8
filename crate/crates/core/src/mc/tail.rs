use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::engine::{fold_w, RunSettings};
use super::stats::wilson_interval;
use crate::blockstats::{BlockKind, BlockScheme};
use crate::error::{Error, Result};
use crate::processes::ProcessModel;
use crate::special::normal_tail;

/// Ratios backed by fewer exceedances than this are flagged.
pub const MIN_RELIABLE_COUNT: u64 = 30;

/// `0, 0.1, …, 3.0`, plus `extra` (e.g. a uniformity-range boundary) when it
/// is finite, positive and not already on the grid.
pub fn default_x_grid(extra: Option<f64>) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=30).map(|i| i as f64 / 10.0).collect();
    if let Some(x) = extra.filter(|x| x.is_finite() && *x > 0.0) {
        if !grid.contains(&x) {
            grid.push(x);
            grid.sort_by(f64::total_cmp);
        }
    }
    grid
}

pub(crate) fn check_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.is_empty() {
        return Err(Error::invalid("x grid is empty"));
    }
    if x_grid.iter().any(|x| !x.is_finite() || *x < 0.0) || x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("x grid must be finite, nonnegative and strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub model_hash: String,
    pub seed: u64,
    pub replicates: u64,
    pub n: usize,
    pub m: usize,
    pub kind: BlockKind,
    pub wall_time_secs: f64,
}

/// Empirical `P(W ≥ x)` on a grid. Degenerate replicates never count as
/// exceedances; `p_hat` divides by all `R` replicates and
/// `p_hat_nondegenerate` by the `R − degenerate_count` others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub x_grid: Vec<f64>,
    pub counts: Vec<u64>,
    pub replicates: u64,
    pub degenerate_count: u64,
    pub p_hat: Vec<f64>,
    pub p_hat_nondegenerate: Vec<f64>,
    pub wilson_lo: Vec<f64>,
    pub wilson_hi: Vec<f64>,
    pub normal_tail: Vec<f64>,
    pub ratio: Vec<f64>,
    pub unreliable: Vec<bool>,
    pub confidence: f64,
    pub meta: RunMeta,
}

impl TailCurve {
    pub fn from_counts(
        x_grid: Vec<f64>,
        counts: Vec<u64>,
        replicates: u64,
        degenerate_count: u64,
        confidence: f64,
        meta: RunMeta,
    ) -> Result<Self> {
        let r = replicates as f64;
        let kept = replicates - degenerate_count;
        let mut lo = Vec::with_capacity(counts.len());
        let mut hi = Vec::with_capacity(counts.len());
        for &c in &counts {
            let (l, h) = wilson_interval(c, replicates, confidence)?;
            lo.push(l);
            hi.push(h);
        }
        let tails: Vec<f64> = x_grid.iter().map(|&x| normal_tail(x)).collect();
        let p_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / r).collect();
        Ok(TailCurve {
            ratio: p_hat.iter().zip(&tails).map(|(p, t)| p / t).collect(),
            p_hat_nondegenerate: counts
                .iter()
                .map(|&c| if kept == 0 { f64::NAN } else { c as f64 / kept as f64 })
                .collect(),
            unreliable: counts.iter().map(|&c| c < MIN_RELIABLE_COUNT).collect(),
            normal_tail: tails,
            p_hat,
            wilson_lo: lo,
            wilson_hi: hi,
            x_grid,
            counts,
            replicates,
            degenerate_count,
            confidence,
            meta,
        })
    }

    /// `max |ratio − 1|` over grid points in `[lo, hi]` with reliable counts.
    pub fn max_ratio_deviation(&self, lo: f64, hi: f64) -> Option<f64> {
        self.x_grid
            .iter()
            .enumerate()
            .filter(|(i, x)| **x >= lo && **x <= hi && !self.unreliable[*i])
            .map(|(i, _)| (self.ratio[i] - 1.0).abs())
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
    }

    /// One row per grid point; `header` lines are written first as `# key=value`.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("x,count,p_hat,wilson_lo,wilson_hi,normal_tail,ratio,flag\n");
        for i in 0..self.x_grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.x_grid[i],
                self.counts[i],
                self.p_hat[i],
                self.wilson_lo[i],
                self.wilson_hi[i],
                self.normal_tail[i],
                self.ratio[i],
                if self.unreliable[i] { "low_count" } else { "ok" }
            );
        }
        out
    }
}

/// Runs `R` replicates of the block self-normalized sum and tallies
/// `#{W ≥ x}` per grid point, with Wilson bands at level `confidence`.
pub fn run_tail_curve(
    model: &ProcessModel,
    scheme: &BlockScheme,
    x_grid: &[f64],
    run: &RunSettings,
    confidence: f64,
) -> Result<TailCurve> {
    check_grid(x_grid)?;
    run.validate()?;
    let started = Instant::now();
    let g = x_grid.len();
    // hist[i] = #{W : exactly i grid points are ≤ W}; hist[g + 1] = degenerate
    let hist = fold_w(
        model,
        scheme,
        run,
        || vec![0u64; g + 2],
        |h, w| match w {
            Some(w) => h[x_grid.partition_point(|&x| x <= w)] += 1,
            None => h[g + 1] += 1,
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )?;
    let mut counts = vec![0u64; g];
    let mut above = 0u64;
    for i in (0..g).rev() {
        above += hist[i + 1];
        counts[i] = above;
    }
    let meta = RunMeta {
        model_hash: model.to_spec().hash(),
        seed: run.seed,
        replicates: run.replicates,
        n: scheme.n(),
        m: scheme.m(),
        kind: scheme.kind(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    TailCurve::from_counts(x_grid.to_vec(), counts, run.replicates, hist[g + 1], confidence, meta)
}
