//! Dependence quantities `ε_m`, `γ_m`, `δ_m`, `η_{1,n}`, `η_{2,n}` and
//! block-size rules.
//!
//! For a stationary chain the conditional expectations given `F_0` reduce to
//! functions of the current state `Y_0`, and their `L^∞` norms become maxima
//! over states. With `x = f − μ(f)` and `S_j = X_1 + … + X_j`:
//!
//! ```text
//! a_j = E[S_j   | Y_0] = P (x + a_{j−1})
//! b_j = E[S_j^2 | Y_0] = P (x² + 2 x·a_{j−1} + b_{j−1})
//! ```
//!
//! so every quantity costs `O(j · S²)`. I.i.d. models are handled in closed
//! form (all conditional expectations are unconditional). The doubling map
//! carries no finite-state metadata and is rejected where an exact value is
//! required.
//!
//! `σ²` is always an explicit input; it is never re-estimated here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Square};
use crate::processes::{FiniteMarkov, IidModel, ProcessModel};
use crate::special::hurwitz_zeta;

/// Path budget for the exact `ε_m` route.
pub const ENUMERATION_BUDGET: f64 = 1e6;

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("sigma2={sigma2} must be positive")))
    }
}

fn no_meta(what: &str) -> Error {
    Error::UnsupportedModel(format!("{what} needs a finite-state or i.i.d. model"))
}

/// `(a_m, b_m)` as defined in the module docs.
pub fn conditional_moments(chain: &FiniteMarkov, m: usize) -> (Vec<f64>, Vec<f64>) {
    let p = chain.matrix();
    let x = chain.centered();
    let s = x.len();
    let mut a = vec![0.0; s];
    let mut b = vec![0.0; s];
    let mut ta = vec![0.0; s];
    let mut tb = vec![0.0; s];
    for _ in 0..m {
        for t in 0..s {
            ta[t] = x[t] + a[t];
            tb[t] = x[t] * x[t] + 2.0 * x[t] * a[t] + b[t];
        }
        p.apply_into(&ta, &mut a);
        p.apply_into(&tb, &mut b);
    }
    (a, b)
}

/// `δ_m = ( ‖E[S_m|F_0]‖²/(mσ²) + ‖E[S_m²|F_0]/(mσ²) − 1‖ )^{1/2}`.
pub fn delta_m(model: &ProcessModel, m: usize, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    let scale = m as f64 * sigma2;
    match model {
        ProcessModel::Iid(iid) => Ok((iid.variance() / sigma2 - 1.0).abs().sqrt()),
        ProcessModel::FiniteMarkov(chain) => {
            let (a, b) = conditional_moments(chain, m);
            let first = linalg::sup_norm(&a).powi(2) / scale;
            let second = b.iter().fold(0.0f64, |w, v| w.max((v / scale - 1.0).abs()));
            Ok((first + second).sqrt())
        }
        ProcessModel::DoublingMap(_) => Err(no_meta("delta_m")),
    }
}

/// Value of `γ_m` and a certified bound on `|γ_m − value|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma {
    pub value: f64,
    pub truncation_error: f64,
}

/// `γ_m = (m^{1/2} σ)^{−1} Σ_{j≥1} j^{−3/2} ‖E[S_{mj}|F_0]‖_∞`.
///
/// `E[S_N|F_0] = Σ_{i≤N} P^i x` converges to a nonzero limit, so the terms do
/// not decay geometrically; only their distance to the limit does. After `J`
/// exact terms the remainder is replaced by `‖a_{mJ}‖ ζ(3/2, J+1)` with error
/// at most `r_J ζ(3/2, J+1)`, `r_J` bounding `Σ_{i>mJ} ‖P^i x‖` through the
/// contraction certificate.
pub fn gamma_m(model: &ProcessModel, m: usize, sigma2: f64, tail_tol: f64) -> Result<Gamma> {
    check_sigma2(sigma2)?;
    if m == 0 || !(tail_tol > 0.0) {
        return Err(Error::invalid("gamma_m needs m >= 1 and a positive tolerance"));
    }
    let chain = match model {
        ProcessModel::Iid(_) => {
            return Ok(Gamma {
                value: 0.0,
                truncation_error: 0.0,
            })
        }
        ProcessModel::FiniteMarkov(chain) => chain,
        ProcessModel::DoublingMap(_) => return Err(no_meta("gamma_m")),
    };
    if chain.lambda2() >= 1.0 - 1e-12 {
        return Err(Error::UnsupportedModel("second eigenvalue modulus is 1".into()));
    }
    let p = chain.matrix();
    let contraction = chain.contraction();
    let norm = 1.0 / ((m as f64).sqrt() * sigma2.sqrt());
    let mut v = chain.centered().to_vec();
    let mut next = vec![0.0; v.len()];
    let mut cum = vec![0.0; v.len()];
    let mut partial = 0.0;
    let mut j = 0u64;
    loop {
        j += 1;
        for _ in 0..m {
            p.apply_into(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
            for (c, x) in cum.iter_mut().zip(&v) {
                *c += x;
            }
        }
        partial += (j as f64).powf(-1.5) * linalg::sup_norm(&cum);
        let zeta_tail = hurwitz_zeta(1.5, (j + 1) as f64);
        let remainder = linalg::oscillation(&v) * contraction.series_factor();
        let err = remainder * zeta_tail * norm;
        if err <= tail_tol || j > 10_000_000 {
            return Ok(Gamma {
                value: (partial + linalg::sup_norm(&cum) * zeta_tail) * norm,
                truncation_error: err,
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMethod {
    ExactEnumeration,
    BoundedXBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epsilon {
    pub value: f64,
    pub method: EpsilonMethod,
}

/// `‖E[|S_m|^q | Y_0]‖_∞` by enumerating every `S^m` path from each state.
fn chain_abs_moment(chain: &FiniteMarkov, m: usize, q: f64) -> f64 {
    fn walk(chain: &FiniteMarkov, from: usize, left: usize, prob: f64, sum: f64, q: f64) -> f64 {
        if left == 0 {
            return prob * sum.abs().powf(q);
        }
        let x = chain.centered();
        (0..x.len())
            .filter(|&t| chain.transition(from, t) > 0.0)
            .map(|t| walk(chain, t, left - 1, prob * chain.transition(from, t), sum + x[t], q))
            .sum()
    }
    (0..chain.states())
        .map(|s0| walk(chain, s0, m, 1.0, 0.0, q))
        .fold(0.0, f64::max)
}

/// `E|S_m|^q` for an i.i.d. law with finitely many atoms, by path enumeration.
fn iid_abs_moment(atoms: &[(f64, f64)], m: usize, q: f64) -> f64 {
    fn walk(atoms: &[(f64, f64)], left: usize, prob: f64, sum: f64, q: f64) -> f64 {
        if left == 0 {
            return prob * sum.abs().powf(q);
        }
        atoms.iter().map(|&(v, p)| walk(atoms, left - 1, prob * p, sum + v, q)).sum()
    }
    walk(atoms, m, 1.0, 0.0, q)
}

fn iid_exact_feasible(iid: &IidModel, m: usize) -> Option<Vec<(f64, f64)>> {
    let atoms = iid.atoms()?;
    ((atoms.len() as f64).powi(m as i32) <= ENUMERATION_BUDGET).then_some(atoms)
}

/// `ε_m = ‖E[|S_m|^{2+ρ} | F_0]‖^{1/ρ} / (n^{1/2} m^{1/ρ} σ^{2/ρ+1})`.
///
/// Exact when the path count fits [`ENUMERATION_BUDGET`]; otherwise the
/// bounded-`X` upper bound `‖E|S_m|^{2+ρ}|F_0‖ ≤ m^ρ ‖X‖^ρ ‖E[S_m²|F_0]‖` is
/// used. For the doubling map `‖E[S_m²|F_0]‖` is replaced by `m² ‖X‖²`.
pub fn epsilon_m(model: &ProcessModel, m: usize, n: usize, rho: f64, sigma2: f64) -> Result<Epsilon> {
    check_sigma2(sigma2)?;
    if m == 0 || n == 0 {
        return Err(Error::invalid("m and n must be positive"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("rho={rho} must lie in (0, 1]")));
    }
    let sup = model
        .sup_norm()
        .ok_or_else(|| Error::UnsupportedModel("epsilon_m needs a bounded model".into()))?;
    let q = 2.0 + rho;
    let mf = m as f64;
    let (moment, method) = match model {
        ProcessModel::Iid(iid) => match iid_exact_feasible(iid, m) {
            Some(atoms) => (iid_abs_moment(&atoms, m, q), EpsilonMethod::ExactEnumeration),
            None => (
                mf.powf(rho) * sup.powf(rho) * mf * iid.variance(),
                EpsilonMethod::BoundedXBound,
            ),
        },
        ProcessModel::FiniteMarkov(chain) => {
            if (chain.states() as f64).powi(m as i32) <= ENUMERATION_BUDGET {
                (chain_abs_moment(chain, m, q), EpsilonMethod::ExactEnumeration)
            } else {
                let (_, b) = conditional_moments(chain, m);
                (
                    mf.powf(rho) * sup.powf(rho) * linalg::sup_norm(&b),
                    EpsilonMethod::BoundedXBound,
                )
            }
        }
        ProcessModel::DoublingMap(_) => (
            mf.powf(rho) * sup.powf(rho) * (mf * sup).powi(2),
            EpsilonMethod::BoundedXBound,
        ),
    };
    let value = moment.powf(1.0 / rho)
        / ((n as f64).sqrt() * mf.powf(1.0 / rho) * sigma2.sqrt().powf(2.0 / rho + 1.0));
    Ok(Epsilon { value, method })
}

/// `η_{1,n}` and `η_{2,n}` for `n = 1..=max_lag` (index 0 holds lag 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eta {
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
}

/// Suprema over infinite index sets are taken on a finite window that grows
/// until the contraction certificate shows nothing outside it can exceed the
/// window maximum (or falls below `1e-15 ‖x‖²`).
pub fn eta_coefficients(model: &ProcessModel, max_lag: usize) -> Result<Eta> {
    if max_lag == 0 {
        return Err(Error::invalid("max_lag must be positive"));
    }
    let chain = match model {
        ProcessModel::Iid(_) => {
            return Ok(Eta {
                eta1: vec![0.0; max_lag],
                eta2: vec![0.0; max_lag],
            })
        }
        ProcessModel::FiniteMarkov(chain) => chain,
        ProcessModel::DoublingMap(_) => return Err(no_meta("eta_coefficients")),
    };
    if chain.lambda2() >= 1.0 - 1e-12 {
        return Err(Error::UnsupportedModel("second eigenvalue modulus is 1".into()));
    }
    let p = chain.matrix();
    let x = chain.centered();
    let pi = chain.stationary();
    let xnorm = linalg::sup_norm(x);
    let floor = 1e-15 * xnorm * xnorm.max(1.0);

    // η1: ‖P^k x‖ for k ≥ 1; osc(P^k x) is nonincreasing and dominates every later norm.
    let mut norms = Vec::new();
    let mut v = x.to_vec();
    loop {
        v = p.apply(&v);
        norms.push(linalg::sup_norm(&v));
        let k = norms.len();
        let osc = linalg::oscillation(&v);
        if k >= max_lag {
            let window = norms[max_lag - 1..].iter().fold(0.0f64, |a, b| a.max(*b));
            if osc <= window || osc <= floor || k > 1_000_000 {
                break;
            }
        }
    }
    let eta1 = (0..max_lag)
        .map(|n| norms[n..].iter().fold(0.0f64, |a, b| a.max(*b)))
        .collect();

    // η2: sup_{k≥n, d≥0} ‖P^k g_d‖ with g_d = x·P^d x − π(x·P^d x).
    let eta2 = eta2_window(p, x, pi, max_lag, floor);
    Ok(Eta { eta1, eta2 })
}

fn eta2_window(p: &Square, x: &[f64], pi: &[f64], max_lag: usize, floor: f64) -> Vec<f64> {
    let xnorm = linalg::sup_norm(x);
    let mut best = vec![0.0f64; max_lag];
    let mut pdx = x.to_vec(); // P^d x
    let mut d = 0usize;
    loop {
        let mut g: Vec<f64> = x.iter().zip(&pdx).map(|(a, b)| a * b).collect();
        let mean = linalg::dot(pi, &g);
        for v in g.iter_mut() {
            *v -= mean;
        }
        // walk k upward until osc(P^k g) can no longer beat the current maxima
        let mut k = 0usize;
        loop {
            g = p.apply(&g);
            k += 1;
            let nrm = linalg::sup_norm(&g);
            for (n, b) in best.iter_mut().enumerate() {
                if k > n {
                    *b = b.max(nrm);
                }
            }
            let osc = linalg::oscillation(&g);
            if k >= max_lag && (osc <= best[max_lag - 1] || osc <= floor || k > 1_000_000) {
                break;
            }
        }
        // every later d has osc(g_d) ≤ 2‖x‖·osc(P^{d+1} x), and ‖P^k g‖ ≤ osc(g)
        pdx = p.apply(&pdx);
        d += 1;
        let bound = 2.0 * xnorm * linalg::oscillation(&pdx);
        if bound <= best[max_lag - 1] || bound <= floor || d > 100_000 {
            break;
        }
    }
    best
}

/// Everything the moderate-deviation theorem needs for one block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub m: usize,
    pub epsilon_m: f64,
    pub epsilon_method: EpsilonMethod,
    pub gamma_m: f64,
    pub gamma_tail: f64,
    pub delta_m: f64,
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub sigma2: f64,
    pub max_vanishing: f64,
}

impl ConditionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[allow(clippy::too_many_arguments)]
pub fn condition_report(
    model: &ProcessModel,
    m: usize,
    n: usize,
    rho: f64,
    sigma2: f64,
    max_lag: usize,
    tail_tol: f64,
) -> Result<ConditionReport> {
    if m > n {
        return Err(Error::invalid(format!("m={m} exceeds n={n}")));
    }
    let eps = epsilon_m(model, m, n, rho, sigma2)?;
    let gamma = gamma_m(model, m, sigma2, tail_tol)?;
    let delta = delta_m(model, m, sigma2)?;
    let eta = eta_coefficients(model, max_lag)?;
    let ratio = m as f64 / n as f64;
    Ok(ConditionReport {
        m,
        epsilon_m: eps.value,
        epsilon_method: eps.method,
        gamma_m: gamma.value,
        gamma_tail: gamma.truncation_error,
        delta_m: delta,
        eta1: eta.eta1,
        eta2: eta.eta2,
        sigma2,
        max_vanishing: eps.value.max(gamma.value).max(delta).max(ratio),
    })
}

/// Block-size rule families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// `max_i η_{i,n} = O(n^{−β})`, `β > 1`.
    PhiMixing { beta: f64 },
    /// Martingale differences with `‖E[X_i²|F_0] − σ²‖ ≤ C i^{−θ}`.
    Martingale { rho: f64, theta: f64 },
    /// `ε_m = O((m/n)^{1/2})`, `γ_m, δ_m = O(m^{−1/2})`.
    Generic { rho: f64 },
    /// Mean confidence interval, `m = ⌊ln n⌋`.
    Ci,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAdvice {
    pub m: usize,
    pub x_range: String,
}

/// `⌊v⌋`, snapping values within relative 1e−12 of an integer onto it.
fn robust_floor(v: f64) -> usize {
    let r = v.round();
    let f = if (v - r).abs() <= 1e-12 * v.abs().max(1.0) { r } else { v.floor() };
    f.max(0.0) as usize
}

fn fmt_exp(e: f64) -> String {
    let s = format!("{e:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn advise_block_size(regime: Regime, n: usize) -> Result<BlockAdvice> {
    if n < 2 {
        return Err(Error::invalid("n must be at least 2"));
    }
    let nf = n as f64;
    let check_rho = |rho: f64| {
        if rho > 0.0 && rho <= 1.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("rho={rho} must lie in (0, 1]")))
        }
    };
    let (exponent, x_range) = match regime {
        Regime::PhiMixing { beta } => {
            if !(beta > 1.0) || !beta.is_finite() {
                return Err(Error::invalid(format!("beta={beta} must exceed 1")));
            }
            if beta >= 1.5 {
                (2.0 / 7.0, "o(n^{1/14}/sqrt(ln n))".to_string())
            } else {
                (
                    1.0 / (3.0 * beta - 1.0),
                    format!("o(n^{{{}}})", fmt_exp((beta - 1.0) / (6.0 * beta - 2.0))),
                )
            }
        }
        Regime::Martingale { rho, theta } => {
            check_rho(rho)?;
            if !(theta > 0.0) || !theta.is_finite() {
                return Err(Error::invalid(format!("theta={theta} must be positive")));
            }
            let exponent = if theta >= 1.0 {
                rho / (2.0 + 2.0 * rho)
            } else {
                rho / (rho + theta * (2.0 + rho))
            };
            let range = if rho < 1.0 {
                format!(
                    "o(n^{{{}}})",
                    fmt_exp(theta * rho / (2.0 * rho + 2.0 * theta * (2.0 + rho)))
                )
            } else {
                format!("o(n^{{{}}}/ln n)", fmt_exp(rho / (4.0 + 4.0 * rho)))
            };
            (exponent, range)
        }
        Regime::Generic { rho } => {
            check_rho(rho)?;
            (
                2.0 * rho / (2.0 + 3.0 * rho),
                format!("o(n^{{{}}}/sqrt(ln n))", fmt_exp(rho / (4.0 + 6.0 * rho))),
            )
        }
        Regime::Ci => {
            let m = robust_floor(nf.ln()).clamp(1, n);
            let range = format!("|ln kappa_n| = o(R_n), R_n = n/m^2 = {}", nf / (m * m) as f64);
            return Ok(BlockAdvice { m, x_range: range });
        }
    };
    let m = robust_floor(nf.powf(exponent)).clamp(1, n);
    Ok(BlockAdvice { m, x_range })
}
