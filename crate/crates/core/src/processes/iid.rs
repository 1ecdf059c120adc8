use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Centered i.i.d. marginal laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IidDist {
    /// ±1 with probability ½ each.
    Rademacher,
    /// Uniform on `[−½, ½)`.
    UniformCentered,
    Normal { sigma: f64 },
    /// Finite support; values are re-centered by their mean before use.
    BoundedCustom { values: Vec<f64>, probs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IidModel {
    dist: IidDist,
    /// Centered support points for `BoundedCustom`.
    support: Vec<f64>,
    /// Cumulative probabilities for `BoundedCustom`.
    cumulative: Vec<f64>,
    normal: Option<Normal<f64>>,
}

impl IidModel {
    pub fn new(dist: IidDist) -> Result<Self> {
        let mut model = IidModel {
            dist: dist.clone(),
            support: Vec::new(),
            cumulative: Vec::new(),
            normal: None,
        };
        match &dist {
            IidDist::Rademacher | IidDist::UniformCentered => {}
            IidDist::Normal { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::invalid(format!("normal sigma={sigma} must be positive")));
                }
                model.normal = Some(Normal::new(0.0, *sigma).map_err(|e| Error::invalid(e.to_string()))?);
            }
            IidDist::BoundedCustom { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::invalid(
                        "bounded_custom needs equally many values and probabilities",
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("bounded_custom values must be finite"));
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::invalid("bounded_custom probabilities must be >= 0"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "bounded_custom probabilities sum to {total}, not 1"
                    )));
                }
                let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
                model.support = values.iter().map(|v| v - mean).collect();
                let mut acc = 0.0;
                model.cumulative = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
            }
        }
        Ok(model)
    }

    pub fn dist(&self) -> &IidDist {
        &self.dist
    }

    pub fn variance(&self) -> f64 {
        match &self.dist {
            IidDist::Rademacher => 1.0,
            IidDist::UniformCentered => 1.0 / 12.0,
            IidDist::Normal { sigma } => sigma * sigma,
            IidDist::BoundedCustom { probs, .. } => {
                self.support.iter().zip(probs).map(|(v, p)| p * v * v).sum()
            }
        }
    }

    /// `‖X‖_∞`, or `None` for unbounded laws.
    pub fn sup_norm(&self) -> Option<f64> {
        match &self.dist {
            IidDist::Rademacher => Some(1.0),
            IidDist::UniformCentered => Some(0.5),
            IidDist::Normal { .. } => None,
            IidDist::BoundedCustom { probs, .. } => Some(
                self.support
                    .iter()
                    .zip(probs)
                    .filter(|(_, p)| **p > 0.0)
                    .fold(0.0, |m, (v, _)| m.max(v.abs())),
            ),
        }
    }

    /// Finite support as `(value, probability)` pairs, if the law has one.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.dist {
            IidDist::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            IidDist::BoundedCustom { probs, .. } => Some(
                self.support
                    .iter()
                    .copied()
                    .zip(probs.iter().copied())
                    .filter(|(_, p)| *p > 0.0)
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn fill(&self, rng: &mut RngStream, out: &mut [f64]) {
        match &self.dist {
            IidDist::Rademacher => {
                let mut bits = rng.bits();
                for o in out.iter_mut() {
                    *o = if bits.next_bit() { 1.0 } else { -1.0 };
                }
            }
            IidDist::UniformCentered => {
                for o in out.iter_mut() {
                    *o = rng.uniform() - 0.5;
                }
            }
            IidDist::Normal { .. } => {
                let normal = self.normal.as_ref().expect("validated at construction");
                for o in out.iter_mut() {
                    *o = normal.sample(rng);
                }
            }
            IidDist::BoundedCustom { .. } => {
                let last = self.support.len() - 1;
                for o in out.iter_mut() {
                    let u = rng.uniform();
                    let idx = self.cumulative.iter().position(|&c| u < c).unwrap_or(last);
                    *o = self.support[idx];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_support_and_reproducibility() {
        let m = IidModel::new(IidDist::Rademacher).unwrap();
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        m.fill(&mut RngStream::new(5, 0), &mut a);
        m.fill(&mut RngStream::new(5, 0), &mut b);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| *v == 1.0 || *v == -1.0));
    }

    #[test]
    fn rademacher_mean_clt() {
        let m = IidModel::new(IidDist::Rademacher).unwrap();
        let n = 1_000_000;
        let mut x = vec![0.0; n];
        m.fill(&mut RngStream::new(2024, 0), &mut x);
        let mean = x.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn uniform_support() {
        let m = IidModel::new(IidDist::UniformCentered).unwrap();
        let mut x = vec![0.0; 10_000];
        m.fill(&mut RngStream::new(1, 9), &mut x);
        assert!(x.iter().all(|v| (-0.5..=0.5).contains(v)));
    }

    #[test]
    fn custom_is_centered() {
        let m = IidModel::new(IidDist::BoundedCustom {
            values: vec![0.0, 1.0, 5.0],
            probs: vec![0.5, 0.3, 0.2],
        })
        .unwrap();
        let mean: f64 = m.atoms().unwrap().iter().map(|(v, p)| v * p).sum();
        assert!(mean.abs() < 1e-15);
        assert_eq!(m.sup_norm(), Some(5.0 - 1.3));
    }

    #[test]
    fn invalid_parameters() {
        assert!(IidModel::new(IidDist::Normal { sigma: 0.0 }).is_err());
        assert!(IidModel::new(IidDist::BoundedCustom {
            values: vec![0.0, 1.0],
            probs: vec![0.5, 0.4]
        })
        .is_err());
        assert!(IidModel::new(IidDist::BoundedCustom {
            values: vec![0.0],
            probs: vec![0.5, 0.5]
        })
        .is_err());
    }
}
