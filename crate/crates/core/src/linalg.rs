//! Small dense helpers for finite-state kernels.
//!
//! Transition matrices are stored row-major as `Vec<f64>`; the state counts
//! handled here are at most a few dozen, so plain loops are the right tool.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-major square matrix with `dim` rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Square {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Square {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::invalid("transition matrix has no rows"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::invalid(format!(
                    "transition matrix row {i} has {} entries, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Square { dim, data })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    /// `out = self · v`
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(v, &mut out);
        out
    }

    pub fn mul(&self, other: &Square) -> Square {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for l in 0..d {
                let a = self.at(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.at(l, j);
                }
            }
        }
        Square { dim: d, data }
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max v − min v`
pub(crate) fn oscillation(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if v.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Dobrushin ergodicity coefficient `½ max_{i,j} Σ_l |P_il − P_jl|`.
pub(crate) fn dobrushin(p: &Square) -> f64 {
    let d = p.dim;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let tv: f64 = p.row(i).iter().zip(p.row(j)).map(|(a, b)| (a - b).abs()).sum();
            worst = worst.max(0.5 * tv);
        }
    }
    worst.min(1.0)
}

/// Whether the support pattern of `P` is primitive (irreducible and
/// aperiodic), decided on `P^((S−1)²+1)` by Wielandt's bound.
pub(crate) fn is_primitive(p: &Square) -> bool {
    let d = p.dim;
    let pattern: Vec<bool> = p.data.iter().map(|&x| x > 0.0).collect();
    let bool_mul = |a: &[bool], b: &[bool]| -> Vec<bool> {
        let mut out = vec![false; d * d];
        for i in 0..d {
            for l in 0..d {
                if a[i * d + l] {
                    for j in 0..d {
                        out[i * d + j] |= b[l * d + j];
                    }
                }
            }
        }
        out
    };
    let mut exp = (d - 1) * (d - 1) + 1;
    let mut base = pattern;
    let mut acc: Option<Vec<bool>> = None;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => bool_mul(&a, &base),
            });
        }
        exp >>= 1;
        if exp > 0 {
            base = bool_mul(&base, &base);
        }
    }
    acc.map(|a| a.iter().all(|&b| b)).unwrap_or(false)
}

/// Geometric contraction certificate: for every vector `v` and every `k ≥ 0`,
/// `osc(P^k v) ≤ coeff^⌊k/power⌋ · osc(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Contraction {
    pub power: usize,
    pub coeff: f64,
}

impl Contraction {
    /// Finds the first dyadic power of a primitive `P` with Dobrushin
    /// coefficient below one.
    pub fn of(p: &Square) -> Result<Self> {
        let mut power = 1;
        let mut q = p.clone();
        // Wielandt: P^r > 0 (so the coefficient is < 1) once r ≥ (S−1)²+1.
        let limit = 2 * ((p.dim - 1) * (p.dim - 1) + 1);
        loop {
            let c = dobrushin(&q);
            if c < 1.0 - 1e-15 {
                return Ok(Contraction { power, coeff: c });
            }
            if power >= limit {
                return Err(Error::UnsupportedModel(
                    "transition matrix is not contracting".into(),
                ));
            }
            q = q.mul(&q);
            power *= 2;
        }
    }

    /// Upper bound on `Σ_{i ≥ 1} osc(P^i v) / osc(v)`.
    pub fn series_factor(&self) -> f64 {
        self.power as f64 / (1.0 - self.coeff)
    }

    /// Upper bound on `osc(P^k v) / osc(v)`.
    #[cfg(test)]
    pub fn decay(&self, k: usize) -> f64 {
        self.coeff.powi((k / self.power) as i32)
    }
}
