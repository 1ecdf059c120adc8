//! Stationary finite-state Markov chains observed through `X_i = f(Y_i) − μ(f)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Contraction, Square};
use crate::rng::RngStream;

/// Largest state space accepted for the dense stationary solve.
pub const MAX_STATES: usize = 64;

#[derive(Debug, Clone)]
pub struct FiniteMarkov {
    p: Square,
    f: Vec<f64>,
    pi: Vec<f64>,
    mu_f: f64,
    x: Vec<f64>,
    lambda2: f64,
    contraction: Contraction,
    /// Per-row cumulative probabilities scaled to `u64`.
    row_thresholds: Vec<u64>,
    pi_thresholds: Vec<u64>,
}

fn thresholds(probs: &[f64]) -> Vec<u64> {
    let mut acc = 0.0;
    let mut out: Vec<u64> = probs
        .iter()
        .map(|p| {
            acc += p;
            // saturating float-to-int cast
            (acc * 18_446_744_073_709_551_616.0) as u64
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = u64::MAX;
    }
    out
}

#[inline]
fn pick(th: &[u64], u: u64) -> usize {
    // the last threshold is u64::MAX, so the scan always terminates
    let mut j = 0;
    while u >= th[j] && j + 1 < th.len() {
        j += 1;
    }
    j
}

impl FiniteMarkov {
    pub fn new(p_rows: &[Vec<f64>], f: &[f64]) -> Result<Self> {
        let p = Square::from_rows(p_rows)?;
        let s = p.dim;
        if s > MAX_STATES {
            return Err(Error::UnsupportedModel(format!(
                "{s} states exceeds the supported maximum of {MAX_STATES}"
            )));
        }
        if f.len() != s {
            return Err(Error::invalid(format!(
                "observable has {} values for {s} states",
                f.len()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("observable values must be finite"));
        }
        for i in 0..s {
            let row = p.row(i);
            if row.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
                return Err(Error::invalid(format!("row {i} has a negative or non-finite entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("row {i} sums to {total}, not 1")));
            }
        }
        if !linalg::is_primitive(&p) {
            return Err(Error::UnsupportedModel(
                "transition matrix is reducible or periodic".into(),
            ));
        }
        let pi = stationary(&p)?;
        let mu_f = linalg::dot(&pi, f);
        let x: Vec<f64> = f.iter().map(|v| v - mu_f).collect();
        if linalg::oscillation(f) == 0.0 {
            return Err(Error::DegenerateObservable("observable is constant".into()));
        }
        let contraction = Contraction::of(&p)?;
        let lambda2 = second_eigenvalue_modulus(&p);
        let row_thresholds = (0..s).flat_map(|i| thresholds(p.row(i))).collect();
        let pi_thresholds = thresholds(&pi);
        Ok(FiniteMarkov {
            p,
            f: f.to_vec(),
            pi,
            mu_f,
            x,
            lambda2,
            contraction,
            row_thresholds,
            pi_thresholds,
        })
    }

    pub fn states(&self) -> usize {
        self.p.dim
    }

    pub fn transition_rows(&self) -> Vec<Vec<f64>> {
        self.p.rows()
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.p.at(i, j)
    }

    pub fn observable(&self) -> &[f64] {
        &self.f
    }

    /// Centered observable values `f(s) − μ(f)`.
    pub fn centered(&self) -> &[f64] {
        &self.x
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn mean_f(&self) -> f64 {
        self.mu_f
    }

    /// Second-largest eigenvalue modulus of `P`.
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn sup_norm(&self) -> f64 {
        linalg::sup_norm(&self.x)
    }

    pub(crate) fn matrix(&self) -> &Square {
        &self.p
    }

    pub(crate) fn contraction(&self) -> Contraction {
        self.contraction
    }

    /// `Y_0 ~ π`, `Y_i ~ P(Y_{i−1}, ·)`; writes `X_i = x(Y_i)` for `i = 1..=n`.
    pub fn fill(&self, rng: &mut RngStream, out: &mut [f64]) {
        use rand::RngCore;
        let s = self.p.dim;
        let mut state = pick(&self.pi_thresholds, rng.next_u64());
        for o in out.iter_mut() {
            let row = &self.row_thresholds[state * s..(state + 1) * s];
            state = pick(row, rng.next_u64());
            *o = self.x[state];
        }
    }

    /// Same as [`fill`](Self::fill) but records the state path `Y_0..=Y_n`.
    pub fn fill_states(&self, rng: &mut RngStream, states: &mut [usize]) {
        use rand::RngCore;
        let s = self.p.dim;
        if states.is_empty() {
            return;
        }
        states[0] = pick(&self.pi_thresholds, rng.next_u64());
        for i in 1..states.len() {
            let row = &self.row_thresholds[states[i - 1] * s..(states[i - 1] + 1) * s];
            states[i] = pick(row, rng.next_u64());
        }
    }

    /// `σ² = Var_π(x) + 2 Σ_{k≥1} π(x · P^k x)` with absolute error at most `tol`.
    pub fn long_run_variance(&self, tol: f64) -> Result<f64> {
        let weighted_abs: f64 = self.pi.iter().zip(&self.x).map(|(p, x)| p * x.abs()).sum();
        let mut acc: f64 = self.pi.iter().zip(&self.x).map(|(p, x)| p * x * x).sum();
        let mut v = self.x.clone();
        let mut next = vec![0.0; v.len()];
        let factor = self.contraction.series_factor();
        let mut k = 0usize;
        loop {
            // every remaining lag is bounded through osc(P^k x)
            let tail = 2.0 * weighted_abs * linalg::oscillation(&v) * factor;
            if tail <= 0.5 * tol {
                break;
            }
            if k > 50_000_000 {
                return Err(Error::UnsupportedModel(
                    "autocovariance series does not converge fast enough".into(),
                ));
            }
            self.p.apply_into(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
            k += 1;
            let c: f64 = self.pi.iter().zip(&self.x).zip(&v).map(|((p, x), y)| p * x * y).sum();
            acc += 2.0 * c;
        }
        if acc <= tol {
            return Err(Error::DegenerateVariance(format!("long-run variance {acc} <= {tol}")));
        }
        Ok(acc)
    }
}

/// Solves `πP = π`, `Σπ = 1` by a dense LU solve.
fn stationary(p: &Square) -> Result<Vec<f64>> {
    let s = p.dim;
    let mut a: DMatrix<f64> = p.to_nalgebra().transpose() - DMatrix::identity(s, s);
    for j in 0..s {
        a[(s - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(s);
    b[s - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::UnsupportedModel("stationary distribution is not unique".into()))?;
    let pi: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    let pi: Vec<f64> = pi.iter().map(|v| v / total).collect();
    // residual check ‖πP − π‖_∞
    let mut worst: f64 = 0.0;
    for j in 0..s {
        let col: f64 = (0..s).map(|i| pi[i] * p.at(i, j)).sum();
        worst = worst.max((col - pi[j]).abs());
    }
    if worst > 1e-10 {
        return Err(Error::UnsupportedModel(format!(
            "stationary solve residual {worst:e} exceeds 1e-10"
        )));
    }
    Ok(pi)
}

fn second_eigenvalue_modulus(p: &Square) -> f64 {
    if p.dim == 1 {
        return 0.0;
    }
    let eig = p.to_nalgebra().complex_eigenvalues();
    let mut moduli: Vec<(f64, f64)> = eig.iter().map(|z| ((z - 1.0).norm(), z.norm())).collect();
    // drop the Perron root (closest to 1)
    let (idx, _) = moduli
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("non-empty spectrum");
    moduli.remove(idx);
    moduli.iter().fold(0.0, |m, (_, r)| m.max(*r))
}
