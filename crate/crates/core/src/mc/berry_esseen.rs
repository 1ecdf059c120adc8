use serde::{Deserialize, Serialize};

use super::engine::{simulate_w, RunSettings};
use crate::blockstats::BlockScheme;
use crate::error::{Error, Result};
use crate::processes::ProcessModel;
use crate::special::normal_tail;

/// Kolmogorov distance between the empirical law of `values` and `cdf`,
/// checking both one-sided gaps at every jump. `values` must be sorted.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = values.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        let mut j = i;
        while j < values.len() && values[j] == v {
            j += 1;
        }
        let f = cdf(v);
        sup = sup.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseen {
    /// `sup_x |F_R(x) − Φ(x)|` over non-degenerate replicates.
    pub sup_distance: f64,
    /// `1/(2√R')`, the largest binomial standard error of one CDF value.
    pub standard_error: f64,
    pub replicates: u64,
    pub degenerate_count: u64,
    pub degenerate_mass: f64,
}

/// Empirical Kolmogorov distance of `W` from the standard normal.
pub fn berry_esseen_empirical(model: &ProcessModel, scheme: &BlockScheme, run: &RunSettings) -> Result<BerryEsseen> {
    if run.replicates < 1000 {
        return Err(Error::invalid("Berry-Esseen estimate needs R >= 1000"));
    }
    let draws = simulate_w(model, scheme, run)?;
    let mut values: Vec<f64> = draws.iter().flatten().copied().collect();
    let degenerate = run.replicates - values.len() as u64;
    values.sort_by(f64::total_cmp);
    let sup_distance = if values.is_empty() {
        f64::NAN
    } else {
        ks_distance(&values, |x| 1.0 - normal_tail(x))
    };
    Ok(BerryEsseen {
        sup_distance,
        standard_error: 0.5 / (values.len() as f64).sqrt(),
        replicates: run.replicates,
        degenerate_count: degenerate,
        degenerate_mass: degenerate as f64 / run.replicates as f64,
    })
}
