//! Closed-form envelopes: normal tail, Mills bounds, the moderate-deviation
//! and Berry–Esseen right-hand sides, MDP rates and the block-t confidence
//! interval.
//!
//! The theorem constants are existence-only, so `c_rho` and `alpha_rho` are
//! caller-supplied (default 1). Every envelope is therefore a curve up to an
//! unknown multiplicative constant, not a certified numeric bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blockstats::centered_ss;
use crate::error::{Error, Result};

pub use crate::special::normal_tail;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Lower Mills bound `e^{−x²/2} / (√(2π)(1+x))` for `x ≥ 0`.
pub fn mills_lower(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (SQRT_2PI * (1.0 + x))
}

/// Upper Mills bound `e^{−x²/2} / (√π(1+x))` for `x ≥ 0`.
pub fn mills_upper(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (std::f64::consts::PI.sqrt() * (1.0 + x))
}

/// `t |ln t|`, extended by continuity to 0 at `t = 0`.
fn t_abs_ln(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln().abs()
    }
}

/// `ĥε(x, ρ) = ε^{ρ(2−ρ)/4} / (1 + x^{ρ(2+ρ)/4})`.
pub fn hat_epsilon(eps: f64, x: f64, rho: f64) -> f64 {
    eps.powf(rho * (2.0 - rho) / 4.0) / (1.0 + x.powf(rho * (2.0 + rho) / 4.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub rho: f64,
    pub epsilon_m: f64,
    pub gamma_m: f64,
    pub delta_m: f64,
    pub m: usize,
    pub n: usize,
    pub c_rho: f64,
    pub alpha_rho: f64,
}

impl BoundParams {
    /// Parameters with `c_rho = alpha_rho = 1`.
    pub fn new(rho: f64, epsilon_m: f64, gamma_m: f64, delta_m: f64, m: usize, n: usize) -> Result<Self> {
        BoundParams {
            rho,
            epsilon_m,
            gamma_m,
            delta_m,
            m,
            n,
            c_rho: 1.0,
            alpha_rho: 1.0,
        }
        .validated()
    }

    pub fn with_constants(mut self, c_rho: f64, alpha_rho: f64) -> Result<Self> {
        self.c_rho = c_rho;
        self.alpha_rho = alpha_rho;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::invalid(format!("rho={} must lie in (0, 1]", self.rho)));
        }
        for (name, v) in [
            ("epsilon_m", self.epsilon_m),
            ("gamma_m", self.gamma_m),
            ("delta_m", self.delta_m),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name}={v} must be finite and nonnegative")));
            }
        }
        if !(self.c_rho.is_finite() && self.c_rho > 0.0) || !(self.alpha_rho.is_finite() && self.alpha_rho > 0.0) {
            return Err(Error::invalid("constants c_rho and alpha_rho must be positive"));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("m and n must be positive"));
        }
        Ok(self)
    }

    fn m_over_n(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    /// Bound on `|ln P(W ≥ x)/(1 − Φ(x))|`, up to `c_rho`.
    pub bound: f64,
    /// `x ≤ α min{ε^{−1}, √(n/m)}`.
    pub in_range: bool,
}

/// Moderate-deviation envelope for the log tail ratio at `x`.
///
/// `ρ < 1`:
/// `C (x^{2+ρ}ε^ρ + x²(δ² + γ|ln γ| + m/n) + (1+x)(δ + γ|ln γ| + ε^ρ + ĥε + √(m/n)))`.
/// At `ρ = 1` the leading term is `x³ε` and `ε^ρ` in the last factor becomes
/// `ε|ln ε|`.
pub fn theorem_envelope(x: f64, p: &BoundParams) -> Result<Envelope> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::invalid(format!("x={x} must be finite and nonnegative")));
    }
    let p = p.validated()?;
    let (rho, eps, gamma, delta) = (p.rho, p.epsilon_m, p.gamma_m, p.delta_m);
    let ratio = p.m_over_n();
    let g = t_abs_ln(gamma);
    let (lead, eps_term) = if rho < 1.0 {
        (x.powf(2.0 + rho) * eps.powf(rho), eps.powf(rho))
    } else {
        (x.powi(3) * eps, t_abs_ln(eps))
    };
    let bound = p.c_rho
        * (lead
            + x * x * (delta * delta + g + ratio)
            + (1.0 + x) * (delta + g + eps_term + hat_epsilon(eps, x, rho) + ratio.sqrt()));
    let limit = p.alpha_rho * (1.0 / eps).min((1.0 / ratio).sqrt());
    Ok(Envelope {
        bound,
        in_range: x <= limit,
    })
}

/// `min{ε^{−ρ/(2+ρ)}, δ^{−1}, (γ|ln γ|)^{−1/2}, √(n/m)}`, with vanishing
/// quantities contributing `+∞`.
pub fn uniformity_range(p: &BoundParams) -> f64 {
    let inv = |v: f64, power: f64| if v == 0.0 { f64::INFINITY } else { v.powf(-power) };
    inv(p.epsilon_m, p.rho / (2.0 + p.rho))
        .min(inv(p.delta_m, 1.0))
        .min(inv(t_abs_ln(p.gamma_m), 0.5))
        .min((1.0 / p.m_over_n()).sqrt())
}

/// `C (δ + γ|ln γ| + ε^{ρ(2−ρ)/4} + √(m/n))`.
pub fn berry_esseen_envelope(p: &BoundParams) -> Result<f64> {
    let p = p.validated()?;
    Ok(p.c_rho
        * (p.delta_m
            + t_abs_ln(p.gamma_m)
            + p.epsilon_m.powf(p.rho * (2.0 - p.rho) / 4.0)
            + p.m_over_n().sqrt()))
}

/// One real interval; infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    /// `[a, ∞)`
    pub fn at_least(a: f64) -> Self {
        Self::new(a, f64::INFINITY, true, false)
    }

    /// `(−∞, a]`
    pub fn at_most(a: f64) -> Self {
        Self::new(f64::NEG_INFINITY, a, false, true)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Distance from 0 to the closure.
    fn distance_to_origin(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                v.to_string()
            }
        };
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            end(self.lo),
            end(self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// `[a,b]`, `(a,b)`, `[a,b)`, `(a,b]`; endpoints may be `inf`/`-inf`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse interval `{s}`"));
        let lo_closed = match s.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let hi_closed = match s.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let inner = &s[1..s.len() - 1];
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let num = |t: &str| -> Result<f64> {
            let v: f64 = t.trim().parse().map_err(|_| bad())?;
            if v.is_nan() {
                Err(bad())
            } else {
                Ok(v)
            }
        };
        Ok(Interval::new(num(a)?, num(b)?, lo_closed, hi_closed))
    }
}

/// Finite union of intervals, stored sorted, disjoint and with touching
/// pieces merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BorelSet {
    intervals: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Interior,
    Closure,
}

impl BorelSet {
    pub fn empty() -> Self {
        BorelSet::default()
    }

    pub fn new(intervals: impl IntoIterator<Item = Interval>) -> Result<Self> {
        let mut pieces: Vec<Interval> = Vec::new();
        for iv in intervals {
            if iv.lo.is_nan() || iv.hi.is_nan() {
                return Err(Error::invalid("interval endpoints must not be NaN"));
            }
            if !iv.is_empty() {
                pieces.push(iv);
            }
        }
        pieces.sort_by(|a, b| {
            a.lo.total_cmp(&b.lo).then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            if let Some(last) = merged.last_mut() {
                let overlaps = iv.lo < last.hi
                    || (iv.lo == last.hi && (iv.lo_closed || last.hi_closed));
                if overlaps {
                    if iv.hi > last.hi || (iv.hi == last.hi && iv.hi_closed) {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    }
                    continue;
                }
            }
            merged.push(iv);
        }
        Ok(BorelSet { intervals: merged })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// `{−x : x ∈ B}`
    pub fn reflect(&self) -> Self {
        BorelSet::new(
            self.intervals
                .iter()
                .map(|iv| Interval::new(-iv.hi, -iv.lo, iv.hi_closed, iv.lo_closed)),
        )
        .expect("reflection of a valid set is valid")
    }
}

impl fmt::Display for BorelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.intervals.iter().map(|iv| iv.to_string()).collect();
        write!(f, "{}", parts.join("U"))
    }
}

impl FromStr for BorelSet {
    type Err = Error;

    /// Intervals joined by `U` (or `∪`), e.g. `[-3,-2]U[2,5]`; `{}` is empty.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "{}" || s.is_empty() {
            return Ok(BorelSet::empty());
        }
        let pieces = s
            .split(['U', 'u', '∪'])
            .map(str::parse::<Interval>)
            .collect::<Result<Vec<_>>>()?;
        BorelSet::new(pieces)
    }
}

/// `inf_{x ∈ B°} x²/2` or `inf_{x ∈ B̄} x²/2`; `+∞` when that set is empty.
pub fn mdp_rate(b: &BorelSet, part: Part) -> f64 {
    b.intervals
        .iter()
        .filter(|iv| part == Part::Closure || iv.lo < iv.hi)
        .map(|iv| 0.5 * iv.distance_to_origin().powi(2))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiInterval {
    pub delta_n: f64,
    pub quantile: f64,
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
}

impl CiInterval {
    pub fn covers(&self, mu: f64) -> bool {
        self.lower <= mu && mu <= self.upper
    }
}

/// `√(2|ln(κ/2)|)`
pub fn ci_quantile(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::invalid(format!("kappa={kappa} must lie in (0, 1)")));
    }
    Ok((2.0 * (kappa / 2.0).ln().abs()).sqrt())
}

/// `Δ_n = √(2|ln(κ/2)|)/(km) · √(Σ(Y_j − Ȳ)²)` with interval
/// `[ΣY_j/(km) − Δ_n, ΣY_j/(km) + Δ_n]`.
pub fn ci_halfwidth(block_sums: &[f64], m: usize, kappa: f64) -> Result<CiInterval> {
    let quantile = ci_quantile(kappa)?;
    let k = block_sums.len();
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 blocks, got {k}")));
    }
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    let (ss, total) = centered_ss(block_sums);
    if !(ss > 0.0) {
        return Err(Error::DegenerateStatistic("block sums are all equal".into()));
    }
    let km = (k * m) as f64;
    let delta_n = quantile / km * ss.sqrt();
    let center = total / km;
    Ok(CiInterval {
        delta_n,
        quantile,
        center,
        lower: center - delta_n,
        upper: center + delta_n,
    })
}
