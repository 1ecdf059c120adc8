//! Observables along orbits of the doubling map `T(u) = 2u mod 1`.
//!
//! The orbit of a Lebesgue-uniform point is the left shift of its binary
//! digits, so orbits are generated from fresh fair bits rather than by
//! iterating `2u mod 1` in floating point (which collapses to 0 after 53
//! steps). Each orbit point is read from a 64-bit sliding window of digits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DoublingObservable {
    /// `1{u ≥ ½}`, the leading binary digit.
    IndicatorHalf,
    /// `u − ½`.
    CenteredIdentity,
    /// Right-continuous step function: `values[i]` on `[breaks[i−1], breaks[i])`
    /// with `breaks` strictly increasing inside `(0, 1)`.
    Step { breaks: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Step { edges: Vec<f64>, values: Vec<f64> },
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingMap {
    observable: DoublingObservable,
    shape: Shape,
    mean: f64,
}

impl DoublingMap {
    pub fn new(observable: DoublingObservable) -> Result<Self> {
        let shape = match &observable {
            DoublingObservable::IndicatorHalf => Shape::Step {
                edges: vec![0.0, 0.5, 1.0],
                values: vec![0.0, 1.0],
            },
            DoublingObservable::CenteredIdentity => Shape::Identity,
            DoublingObservable::Step { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::UnsupportedObservable(format!(
                        "step function with {} breakpoints needs {} values, got {}",
                        breaks.len(),
                        breaks.len() + 1,
                        values.len()
                    )));
                }
                if values.iter().chain(breaks).any(|v| !v.is_finite()) {
                    return Err(Error::UnsupportedObservable(
                        "step function entries must be finite".into(),
                    ));
                }
                if breaks.iter().any(|&b| !(b > 0.0 && b < 1.0))
                    || breaks.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(Error::UnsupportedObservable(
                        "breakpoints must be strictly increasing inside (0, 1)".into(),
                    ));
                }
                let mut edges = Vec::with_capacity(breaks.len() + 2);
                edges.push(0.0);
                edges.extend_from_slice(breaks);
                edges.push(1.0);
                Shape::Step {
                    edges,
                    values: values.clone(),
                }
            }
        };
        let mean = match &shape {
            Shape::Identity => 0.5,
            Shape::Step { edges, values } => {
                values.iter().enumerate().map(|(i, v)| v * (edges[i + 1] - edges[i])).sum()
            }
        };
        let model = DoublingMap {
            observable,
            shape,
            mean,
        };
        if model.variance() <= 0.0 {
            return Err(Error::DegenerateObservable("observable is a.e. constant".into()));
        }
        Ok(model)
    }

    pub fn observable(&self) -> &DoublingObservable {
        &self.observable
    }

    /// `μ(f)` under Lebesgue measure.
    pub fn mean_f(&self) -> f64 {
        self.mean
    }

    #[inline]
    fn eval(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Identity => u,
            Shape::Step { edges, values } => {
                // values[i] on [edges[i], edges[i+1])
                let idx = edges[1..edges.len() - 1].partition_point(|&b| b <= u);
                values[idx]
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match &self.shape {
            Shape::Identity => 0.5,
            Shape::Step { values, .. } => values.iter().fold(0.0, |m, v| m.max((v - self.mean).abs())),
        }
    }

    /// Total variation of `f` on `[0, 1]`.
    pub fn total_variation(&self) -> f64 {
        match &self.shape {
            Shape::Identity => 1.0,
            Shape::Step { values, .. } => values.windows(2).map(|w| (w[1] - w[0]).abs()).sum(),
        }
    }

    /// `Var(f(U))`
    pub fn variance(&self) -> f64 {
        match &self.shape {
            Shape::Identity => 1.0 / 12.0,
            Shape::Step { edges, values } => values
                .iter()
                .enumerate()
                .map(|(i, v)| (v - self.mean).powi(2) * (edges[i + 1] - edges[i]))
                .sum(),
        }
    }

    /// `‖f − μ(f)‖_1`
    fn centered_l1(&self) -> f64 {
        match &self.shape {
            Shape::Identity => 0.25,
            Shape::Step { edges, values } => values
                .iter()
                .enumerate()
                .map(|(i, v)| (v - self.mean).abs() * (edges[i + 1] - edges[i]))
                .sum(),
        }
    }

    /// `Cov(f(U), f(T^k U))` for `U` uniform on `[0, 1)`.
    pub fn autocovariance(&self, lag: u32) -> f64 {
        if lag == 0 {
            return self.variance();
        }
        match &self.shape {
            Shape::Identity => (0.5f64).powi(lag as i32) / 12.0,
            Shape::Step { edges, values } => {
                let scale = 2f64.powi(lag as i32);
                // Leb{u ∈ [0, t) : {2^k u} ∈ [b0, b1)}
                let hits = |t: f64, b0: f64, b1: f64| -> f64 {
                    let y = scale * t;
                    let whole = y.floor();
                    let frac = y - whole;
                    (whole * (b1 - b0) + (frac.min(b1) - b0).max(0.0)) / scale
                };
                let mut acc = 0.0;
                for (a, va) in values.iter().enumerate() {
                    for (b, vb) in values.iter().enumerate() {
                        let (b0, b1) = (edges[b], edges[b + 1]);
                        let measure = hits(edges[a + 1], b0, b1) - hits(edges[a], b0, b1);
                        acc += (va - self.mean) * (vb - self.mean) * measure;
                    }
                }
                acc
            }
        }
    }

    /// `σ² = Var f + 2 Σ_{k≥1} Cov(f, f∘T^k)` with absolute error at most `tol`.
    ///
    /// The transfer operator of the doubling map halves total variation, so
    /// `|Cov(f, f∘T^k)| ≤ 2^{−k} TV(f) ‖f − μ(f)‖_1`.
    pub fn long_run_variance(&self, tol: f64) -> Result<f64> {
        let sigma2 = match self.shape {
            Shape::Identity => 0.25,
            Shape::Step { .. } => {
                let c = self.total_variation() * self.centered_l1();
                let mut acc = self.variance();
                let mut lag = 0u32;
                // tail after `lag`: 2 Σ_{k>lag} 2^{−k} c = 2^{1−lag} c
                while 2.0 * c * 0.5f64.powi(lag as i32) > tol {
                    lag += 1;
                    if lag > 60 {
                        break;
                    }
                    acc += 2.0 * self.autocovariance(lag);
                }
                acc
            }
        };
        if sigma2 <= tol {
            return Err(Error::DegenerateVariance(format!(
                "long-run variance {sigma2} <= {tol}"
            )));
        }
        Ok(sigma2)
    }

    /// Writes `X_k = f(T^{n−k+1} u) − μ(f)`, `k = 1..=n`, for a uniform `u`.
    pub fn fill(&self, rng: &mut RngStream, out: &mut [f64]) {
        let n = out.len();
        let mut bits = rng.bits();
        let mut window: u64 = 0;
        for _ in 0..64 {
            window = (window << 1) | bits.next_bit() as u64;
        }
        // orbit point i = T^i w, written at position n−1−i
        for i in 0..n {
            let u = (window >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            out[n - 1 - i] = self.eval(u) - self.mean;
            window = (window << 1) | bits.next_bit() as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn indicator_half_signs() {
        let d = DoublingMap::new(DoublingObservable::IndicatorHalf).unwrap();
        assert_eq!(d.mean_f(), 0.5);
        let mut x = vec![0.0; 1000];
        d.fill(&mut RngStream::new(1, 0), &mut x);
        assert!(x.iter().all(|v| *v == 0.5 || *v == -0.5));
        assert_abs_diff_eq!(d.long_run_variance(1e-12).unwrap(), 0.25, epsilon = 1e-12);
        for lag in 1..10 {
            assert_abs_diff_eq!(d.autocovariance(lag), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_single_point_in_range() {
        let d = DoublingMap::new(DoublingObservable::CenteredIdentity).unwrap();
        let mut x = [0.0];
        for r in 0..100 {
            d.fill(&mut RngStream::new(4, r), &mut x);
            assert!((-0.5..0.5).contains(&x[0]));
        }
    }

    #[test]
    fn identity_lag_one_autocovariance() {
        // ∫ x (2x mod 1) dx − 1/4 = 1/24
        let d = DoublingMap::new(DoublingObservable::CenteredIdentity).unwrap();
        assert_abs_diff_eq!(d.autocovariance(1), 1.0 / 24.0, epsilon = 1e-15);
        let n = 1_000_000;
        let mut x = vec![0.0; n];
        d.fill(&mut RngStream::new(77, 0), &mut x);
        let cov: f64 = x.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1) as f64;
        assert!((cov - 1.0 / 24.0).abs() < 2e-3, "{cov}");
    }

    #[test]
    fn step_autocovariance_by_quadrature() {
        let d = DoublingMap::new(DoublingObservable::Step {
            // dyadic breakpoints keep the midpoint rule exact
            breaks: vec![307.0 / 1024.0, 563.0 / 1024.0, 819.0 / 1024.0],
            values: vec![1.0, -2.0, 0.5, 3.0],
        })
        .unwrap();
        for lag in 1..6u32 {
            let grid = 1 << 22;
            let h = 1.0 / grid as f64;
            let mut acc = 0.0;
            for i in 0..grid {
                let u = (i as f64 + 0.5) * h;
                let v = (u * 2f64.powi(lag as i32)).fract();
                acc += (d.eval(u) - d.mean) * (d.eval(v) - d.mean);
            }
            assert_abs_diff_eq!(d.autocovariance(lag), acc * h, epsilon = 1e-12);
        }
    }

    #[test]
    fn malformed_steps_rejected() {
        for obs in [
            DoublingObservable::Step { breaks: vec![0.5, 0.2], values: vec![0.0, 1.0, 2.0] },
            DoublingObservable::Step { breaks: vec![1.5], values: vec![0.0, 1.0] },
            DoublingObservable::Step { breaks: vec![0.5], values: vec![0.0] },
            DoublingObservable::Step { breaks: vec![0.5], values: vec![0.0, f64::NAN] },
        ] {
            assert!(matches!(DoublingMap::new(obs), Err(Error::UnsupportedObservable(_))));
        }
        assert!(matches!(
            DoublingMap::new(DoublingObservable::Step { breaks: vec![0.5], values: vec![1.0, 1.0] }),
            Err(Error::DegenerateObservable(_))
        ));
    }
}
