use crate::error::{Error, Result};
use crate::special::normal_quantile;

/// Wilson score interval for `successes` out of `trials` at two-sided
/// confidence `conf_level`.
pub fn wilson_interval(successes: u64, trials: u64, conf_level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::invalid(format!(
            "Wilson interval needs 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
        )));
    }
    if !(conf_level > 0.0 && conf_level < 1.0) {
        return Err(Error::invalid(format!("confidence level {conf_level} must lie in (0, 1)")));
    }
    let z = normal_quantile(1.0 - (1.0 - conf_level) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}
