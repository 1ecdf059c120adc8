use serde::{Deserialize, Serialize};

use super::engine::{fold_w, RunSettings};
use super::stats::wilson_interval;
use crate::blockstats::{BlockKind, BlockScheme};
use crate::bounds::BorelSet;
use crate::error::{Error, Result};
use crate::processes::ProcessModel;

/// `m_n = max(1, ⌊n^{m_exponent}⌋)` and `a_n = n^{−a_exponent}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpConfig {
    pub n_grid: Vec<usize>,
    pub m_exponent: f64,
    pub a_exponent: f64,
    pub kind: BlockKind,
    pub set: BorelSet,
    pub confidence: f64,
}

impl MdpConfig {
    pub fn block_length(&self, n: usize) -> usize {
        let raw = (n as f64).powf(self.m_exponent);
        let snapped = if (raw - raw.round()).abs() <= 1e-12 * raw { raw.round() } else { raw.floor() };
        (snapped as usize).clamp(1, n)
    }

    pub fn scale(&self, n: usize) -> f64 {
        (n as f64).powf(-self.a_exponent)
    }
}

/// One row of the moderate-deviation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpPoint {
    pub n: usize,
    pub m: usize,
    pub a_n: f64,
    pub count: u64,
    pub replicates: u64,
    pub degenerate_count: u64,
    pub p_hat: f64,
    /// `a_n² ln p̂`; `None` when no replicate hit the set (censored, `p̂ < 1/R`).
    pub estimate: Option<f64>,
    /// `a_n² ln` of the Wilson bounds; the lower end is `None` when censored.
    pub band_lo: Option<f64>,
    pub band_hi: f64,
    pub censored: bool,
}

/// Estimates `a_n² ln P(a_n W ∈ B)` along `n_grid`, using seed stream
/// `seed + index` for the `index`-th grid point.
pub fn mdp_empirical(model: &ProcessModel, cfg: &MdpConfig, run: &RunSettings) -> Result<Vec<MdpPoint>> {
    if cfg.n_grid.is_empty() {
        return Err(Error::invalid("n grid is empty"));
    }
    if !(cfg.a_exponent > 0.0) {
        return Err(Error::invalid("a_n must tend to zero (a_exponent > 0)"));
    }
    cfg.n_grid
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let m = cfg.block_length(n);
            let scheme = BlockScheme::new(n, m, cfg.kind)?;
            let a_n = cfg.scale(n);
            let run_n = RunSettings {
                seed: run.seed.wrapping_add(idx as u64),
                ..*run
            };
            let (count, degenerate) = fold_w(
                model,
                &scheme,
                &run_n,
                || (0u64, 0u64),
                |acc, w| match w {
                    Some(w) if cfg.set.contains(a_n * w) => acc.0 += 1,
                    Some(_) => {}
                    None => acc.1 += 1,
                },
                |a, b| (a.0 + b.0, a.1 + b.1),
            )?;
            let (lo, hi) = wilson_interval(count, run.replicates, cfg.confidence)?;
            let p_hat = count as f64 / run.replicates as f64;
            let a2 = a_n * a_n;
            Ok(MdpPoint {
                n,
                m,
                a_n,
                count,
                replicates: run.replicates,
                degenerate_count: degenerate,
                p_hat,
                estimate: (count > 0).then(|| a2 * p_hat.ln()),
                band_lo: (lo > 0.0).then(|| a2 * lo.ln()),
                band_hi: a2 * hi.ln(),
                censored: count == 0,
            })
        })
        .collect()
}
