use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{in_pool, Kernel, RunSettings};
use crate::blockstats::{BlockKind, BlockScheme};
use crate::bounds::{ci_halfwidth, ci_quantile};
use crate::error::{Error, Result};
use crate::processes::ProcessModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub replicates: u64,
    /// Replicates whose closed interval contains `μ`.
    pub hits: u64,
    pub coverage: f64,
    /// Replicates with zero centered sum of squares, counted as misses.
    pub degenerate: u64,
    /// Mean of `Δ_n` over non-degenerate replicates.
    pub mean_halfwidth: f64,
    pub quantile: f64,
    pub kappa: f64,
    pub mu: f64,
    pub n: usize,
    pub m: usize,
}

/// Coverage of `[A_n, B_n]` for data `ζ_i = X_i + μ`.
pub fn ci_coverage(
    model: &ProcessModel,
    mu: f64,
    n: usize,
    m: usize,
    kappa: f64,
    run: &RunSettings,
) -> Result<CoverageReport> {
    run.validate()?;
    let quantile = ci_quantile(kappa)?;
    if !mu.is_finite() {
        return Err(Error::invalid("mu must be finite"));
    }
    let scheme = BlockScheme::new(n, m, BlockKind::Contiguous)?;
    if scheme.k() < 2 {
        return Err(Error::invalid(format!("n={n}, m={m} leaves fewer than 2 blocks")));
    }
    let per_rep: Vec<Option<(bool, f64)>> = in_pool(run.threads, || {
        (0..run.replicates)
            .into_par_iter()
            .map_init(
                || Kernel::new(model, &scheme),
                |k, r| {
                    let sums = k.block_sums(run.seed, r, mu);
                    ci_halfwidth(sums, m, kappa).ok().map(|ci| (ci.covers(mu), ci.delta_n))
                },
            )
            .collect()
    })?;
    let mut hits = 0u64;
    let mut degenerate = 0u64;
    let mut width_sum = 0.0;
    for rep in &per_rep {
        match rep {
            Some((hit, width)) => {
                hits += *hit as u64;
                width_sum += width;
            }
            None => degenerate += 1,
        }
    }
    let kept = run.replicates - degenerate;
    Ok(CoverageReport {
        replicates: run.replicates,
        hits,
        coverage: hits as f64 / run.replicates as f64,
        degenerate,
        mean_halfwidth: if kept == 0 { f64::NAN } else { width_sum / kept as f64 },
        quantile,
        kappa,
        mu,
        n,
        m,
    })
}
