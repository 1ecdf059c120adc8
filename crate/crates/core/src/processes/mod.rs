//! Stationary sequence generators with exact-analysis metadata.
//!
//! Three families are supported: centered i.i.d. laws, functionals of
//! stationary finite-state Markov chains, and step/affine observables along
//! orbits of the doubling map. All of them are pure given an [`RngStream`].

mod doubling;
mod iid;
mod markov;
mod spec;

pub use doubling::{DoublingMap, DoublingObservable};
pub use iid::{IidDist, IidModel};
pub use markov::{FiniteMarkov, MAX_STATES};
pub use spec::{Family, ModelSpec};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub enum ProcessModel {
    Iid(IidModel),
    FiniteMarkov(FiniteMarkov),
    DoublingMap(DoublingMap),
}

impl ProcessModel {
    pub fn iid(dist: IidDist) -> Result<Self> {
        IidModel::new(dist).map(ProcessModel::Iid)
    }

    pub fn finite_markov(p: &[Vec<f64>], f: &[f64]) -> Result<Self> {
        FiniteMarkov::new(p, f).map(ProcessModel::FiniteMarkov)
    }

    pub fn doubling_map(f: DoublingObservable) -> Result<Self> {
        DoublingMap::new(f).map(ProcessModel::DoublingMap)
    }

    pub fn family(&self) -> Family {
        match self {
            ProcessModel::Iid(_) => Family::Iid,
            ProcessModel::FiniteMarkov(_) => Family::FiniteMarkov,
            ProcessModel::DoublingMap(_) => Family::DoublingMap,
        }
    }

    /// Transition matrix, observable and stationary law, when available.
    pub fn exact_meta(&self) -> Option<&FiniteMarkov> {
        match self {
            ProcessModel::FiniteMarkov(c) => Some(c),
            _ => None,
        }
    }

    /// `‖X‖_∞`; `None` for unbounded laws.
    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            ProcessModel::Iid(m) => m.sup_norm(),
            ProcessModel::FiniteMarkov(c) => Some(c.sup_norm()),
            ProcessModel::DoublingMap(d) => Some(d.sup_norm()),
        }
    }

    /// Fills `out` with `X_1, …, X_n` (mean zero) for `n = out.len()`.
    pub fn fill(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            ProcessModel::Iid(m) => m.fill(rng, out),
            ProcessModel::FiniteMarkov(c) => c.fill(rng, out),
            ProcessModel::DoublingMap(d) => d.fill(rng, out),
        }
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::invalid("sample length must be positive"));
        }
        let mut out = vec![0.0; n];
        self.fill(rng, &mut out);
        Ok(out)
    }

    /// Long-run variance `Σ_k E[X_0 X_k]` with absolute error at most `tol`.
    pub fn long_run_variance(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        match self {
            ProcessModel::Iid(m) => {
                let v = m.variance();
                if v <= tol {
                    Err(Error::DegenerateVariance(format!("variance {v} <= {tol}")))
                } else {
                    Ok(v)
                }
            }
            ProcessModel::FiniteMarkov(c) => c.long_run_variance(tol),
            ProcessModel::DoublingMap(d) => d.long_run_variance(tol),
        }
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec::from_model(self)
    }
}

/// Draws a replicate sample for `(master_seed, replicate)`.
pub fn sample_replicate(
    model: &ProcessModel,
    n: usize,
    master_seed: u64,
    replicate: u64,
) -> Result<Vec<f64>> {
    model.sample(n, &mut RngStream::new(master_seed, replicate))
}
