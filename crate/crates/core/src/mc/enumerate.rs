use serde::{Deserialize, Serialize};

use super::tail::check_grid;
use crate::blockstats::{block_sums_into, ratio, sum_and_squares, BlockScheme};
use crate::error::{Error, Result};
use crate::processes::{FiniteMarkov, IidDist, ProcessModel};
use crate::special::normal_tail;

const BUDGET: f64 = 1e6;
const RADEMACHER_MAX_N: usize = 20;

/// Exact law of `W` over every outcome of the first `n` observations.
///
/// For ±1 inputs every outcome weighs `2^{−n}`, so all probabilities (and
/// their sums) are exact binary fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactLaw {
    /// Distinct values of `W` in increasing order with their probabilities.
    pub atoms: Vec<(f64, f64)>,
    pub degenerate_mass: f64,
    pub outcomes: u64,
}

impl ExactLaw {
    /// `P(W ≥ x, V > 0)`
    pub fn tail(&self, x: f64) -> f64 {
        let start = self.atoms.partition_point(|(w, _)| *w < x);
        self.atoms[start..].iter().map(|(_, p)| p).sum()
    }

    /// `P(W ≤ x, V > 0)`
    pub fn cdf(&self, x: f64) -> f64 {
        let end = self.atoms.partition_point(|(w, _)| *w <= x);
        self.atoms[..end].iter().map(|(_, p)| p).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum::<f64>() + self.degenerate_mass
    }

    /// `sup_x |P(W ≤ x | V > 0) − Φ(x)|`, attained at an atom from one side.
    pub fn sup_distance_to_normal(&self) -> f64 {
        let kept = 1.0 - self.degenerate_mass;
        let mut below = 0.0;
        let mut sup = 0.0f64;
        for (w, p) in &self.atoms {
            let phi = 1.0 - normal_tail(*w);
            sup = sup.max((below / kept - phi).abs());
            below += p;
            sup = sup.max((below / kept - phi).abs());
        }
        sup
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactTail {
    pub x_grid: Vec<f64>,
    /// `P(W ≥ x, V > 0)` per grid point.
    pub tail: Vec<f64>,
    pub degenerate_mass: f64,
    pub total_mass: f64,
}

fn too_large(what: String) -> Error {
    Error::UnsupportedSize(format!("{what} exceeds the enumeration budget"))
}

struct Tally<'a> {
    scheme: &'a BlockScheme,
    sums: Vec<f64>,
    outcomes: Vec<(Option<f64>, f64)>,
}

impl Tally<'_> {
    fn record(&mut self, sample: &[f64], prob: f64) {
        block_sums_into(sample, self.scheme, &mut self.sums);
        let (s, v2) = sum_and_squares(&self.sums);
        self.outcomes.push((ratio(s, v2), prob));
    }

    fn into_law(self) -> ExactLaw {
        let count = self.outcomes.len() as u64;
        let mut degenerate = 0.0;
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for (w, p) in self.outcomes {
            match w {
                Some(w) => atoms.push((w, p)),
                None => degenerate += p,
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (w, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == w => last.1 += p,
                _ => merged.push((w, p)),
            }
        }
        ExactLaw {
            atoms: merged,
            degenerate_mass: degenerate,
            outcomes: count,
        }
    }
}

fn enumerate_iid(atoms: &[(f64, f64)], tally: &mut Tally<'_>, n: usize) {
    let mut digits = vec![0usize; n];
    let mut sample: Vec<f64> = vec![atoms[0].0; n];
    loop {
        let prob: f64 = digits.iter().map(|&d| atoms[d].1).product();
        tally.record(&sample, prob);
        // odometer increment, last position fastest
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < atoms.len() {
                sample[i] = atoms[digits[i]].0;
                break;
            }
            digits[i] = 0;
            sample[i] = atoms[0].0;
        }
    }
}

fn enumerate_chain(chain: &FiniteMarkov, tally: &mut Tally<'_>, n: usize) {
    fn walk(chain: &FiniteMarkov, tally: &mut Tally<'_>, sample: &mut Vec<f64>, n: usize, from: usize, prob: f64) {
        if sample.len() == n {
            tally.record(sample, prob);
            return;
        }
        for to in 0..chain.states() {
            let p = chain.transition(from, to);
            if p > 0.0 {
                sample.push(chain.centered()[to]);
                walk(chain, tally, sample, n, to, prob * p);
                sample.pop();
            }
        }
    }
    let mut sample = Vec::with_capacity(n);
    for (y0, &p0) in chain.stationary().iter().enumerate() {
        if p0 > 0.0 {
            walk(chain, tally, &mut sample, n, y0, p0);
        }
    }
}

/// Exact law of `W` for ±1 inputs (`n ≤ 20`), other finite-support i.i.d.
/// laws, or finite-state chains, within a 10^6-path budget.
pub fn enumerate_law(model: &ProcessModel, scheme: &BlockScheme) -> Result<ExactLaw> {
    let n = scheme.n();
    let mut tally = Tally {
        scheme,
        sums: Vec::with_capacity(scheme.k()),
        outcomes: Vec::new(),
    };
    match model {
        ProcessModel::Iid(iid) => {
            let atoms = iid.atoms().ok_or_else(|| {
                Error::UnsupportedModel("exact enumeration needs a finite-support law".into())
            })?;
            if *iid.dist() == IidDist::Rademacher && n > RADEMACHER_MAX_N {
                return Err(too_large(format!("2^{n}")));
            }
            if (atoms.len() as f64).powi(n as i32) > BUDGET {
                return Err(too_large(format!("{}^{n}", atoms.len())));
            }
            enumerate_iid(&atoms, &mut tally, n);
        }
        ProcessModel::FiniteMarkov(chain) => {
            if (chain.states() as f64).powi(n as i32) > BUDGET {
                return Err(too_large(format!("{}^{n}", chain.states())));
            }
            enumerate_chain(chain, &mut tally, n);
        }
        ProcessModel::DoublingMap(_) => {
            return Err(Error::UnsupportedModel(
                "exact enumeration is not available for the doubling map".into(),
            ))
        }
    }
    Ok(tally.into_law())
}

/// Exact `P(W ≥ x, V > 0)` on a grid together with `P(V = 0)`.
pub fn enumerate_exact(model: &ProcessModel, scheme: &BlockScheme, x_grid: &[f64]) -> Result<ExactTail> {
    check_grid(x_grid)?;
    let law = enumerate_law(model, scheme)?;
    Ok(ExactTail {
        x_grid: x_grid.to_vec(),
        tail: x_grid.iter().map(|&x| law.tail(x)).collect(),
        degenerate_mass: law.degenerate_mass,
        total_mass: law.total_mass(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockstats::BlockKind;

    fn rademacher() -> ProcessModel {
        ProcessModel::iid(IidDist::Rademacher).unwrap()
    }

    #[test]
    fn four_signs() {
        let one = BlockScheme::new(4, 1, BlockKind::Contiguous).unwrap();
        let t = enumerate_exact(&rademacher(), &one, &[1.0]).unwrap();
        assert_eq!(t.tail, vec![5.0 / 16.0]);
        assert_eq!(t.degenerate_mass, 0.0);
        let two = BlockScheme::new(4, 2, BlockKind::Contiguous).unwrap();
        let t = enumerate_exact(&rademacher(), &two, &[1.0]).unwrap();
        assert_eq!(t.tail, vec![5.0 / 16.0]);
        assert_eq!(t.degenerate_mass, 0.25);
        assert_eq!(t.total_mass, 1.0);
    }

    #[test]
    fn two_signs_kolmogorov_distance() {
        let s = BlockScheme::new(2, 1, BlockKind::Contiguous).unwrap();
        let law = enumerate_law(&rademacher(), &s).unwrap();
        assert_eq!(law.atoms.len(), 3);
        // W ∈ {−√2, 0, √2} w.p. 1/4, 1/2, 1/4: the CDF jumps from 1/4 to 3/4
        // at 0 where Φ = 1/2, beating |3/4 − Φ(√2)| ≈ 0.171 at the top atom
        assert_eq!(law.sup_distance_to_normal(), 0.25);
        let top = (0.75 - (1.0 - normal_tail(2f64.sqrt()))).abs();
        assert!(top < 0.25);
    }

    #[test]
    fn chain_mass_sums_to_one() {
        let chain = ProcessModel::finite_markov(&[vec![0.9, 0.1], vec![0.2, 0.8]], &[0.0, 1.0]).unwrap();
        let s = BlockScheme::new(3, 1, BlockKind::Contiguous).unwrap();
        let law = enumerate_law(&chain, &s).unwrap();
        assert_eq!(law.outcomes, 16);
        assert!((law.total_mass() - 1.0).abs() < 1e-15);
        assert!((law.tail(f64::NEG_INFINITY) - (1.0 - law.degenerate_mass)).abs() < 1e-15);
    }

    #[test]
    fn budget_enforced() {
        let s = BlockScheme::new(21, 1, BlockKind::Contiguous).unwrap();
        assert!(matches!(enumerate_law(&rademacher(), &s), Err(Error::UnsupportedSize(_))));
        let chain = ProcessModel::finite_markov(
            &[vec![0.5, 0.25, 0.25], vec![0.25, 0.5, 0.25], vec![0.25, 0.25, 0.5]],
            &[0.0, 1.0, 2.0],
        )
        .unwrap();
        let s = BlockScheme::new(13, 1, BlockKind::Contiguous).unwrap();
        assert!(matches!(enumerate_law(&chain, &s), Err(Error::UnsupportedSize(_))));
        let u = ProcessModel::iid(IidDist::UniformCentered).unwrap();
        assert!(matches!(enumerate_law(&u, &s), Err(Error::UnsupportedModel(_))));
    }
}
