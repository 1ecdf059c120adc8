//! Plain-text model specification files.
//!
//! A model file is a TOML document with a `family` key and the fields that
//! family needs:
//!
//! ```toml
//! family = "finite_markov"
//! P = [[0.9, 0.1], [0.2, 0.8]]   # row-major transition matrix
//! f = [0.0, 1.0]                 # observable value per state
//! mean = 0.0                     # optional true mean μ added to X_i
//! seed = 7                       # optional default master seed
//! ```
//!
//! ```toml
//! family = "iid"
//! dist = { kind = "normal", sigma = 2.0 }
//! ```
//!
//! ```toml
//! family = "doubling_map"
//! observable = { kind = "step", breaks = [0.25, 0.5], values = [1.0, 0.0, 2.0] }
//! ```
//!
//! Unknown keys are rejected. Floats are written in shortest round-trip form,
//! so `parse(render(spec)) == spec`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DoublingObservable, IidDist, ProcessModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Iid,
    FiniteMarkov,
    DoublingMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<IidDist>,
    #[serde(rename = "P", alias = "p", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<DoublingObservable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ModelSpec {
    pub fn iid(dist: IidDist) -> Self {
        ModelSpec {
            family: Family::Iid,
            dist: Some(dist),
            p: None,
            f: None,
            observable: None,
            mean: None,
            seed: None,
        }
    }

    pub fn finite_markov(p: Vec<Vec<f64>>, f: Vec<f64>) -> Self {
        ModelSpec {
            family: Family::FiniteMarkov,
            dist: None,
            p: Some(p),
            f: Some(f),
            observable: None,
            mean: None,
            seed: None,
        }
    }

    pub fn doubling_map(observable: DoublingObservable) -> Self {
        ModelSpec {
            family: Family::DoublingMap,
            dist: None,
            p: None,
            f: None,
            observable: Some(observable),
            mean: None,
            seed: None,
        }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }

    /// Named shorthand models used by the command line and the test suites.
    ///
    /// `rademacher`, `uniform` (alias `uniform_centered`), `normal`,
    /// `two_state` (`P = [[0.9, 0.1], [0.2, 0.8]]`, `f = (0, 1)`),
    /// `doubling_indicator`, `doubling_identity`.
    pub fn preset(name: &str) -> Result<Self> {
        let name = name.replace('-', "_");
        Ok(match name.as_str() {
            "rademacher" => ModelSpec::iid(IidDist::Rademacher),
            "uniform" | "uniform_centered" => ModelSpec::iid(IidDist::UniformCentered),
            "normal" => ModelSpec::iid(IidDist::Normal { sigma: 1.0 }),
            "two_state" => ModelSpec::finite_markov(
                vec![vec![0.9, 0.1], vec![0.2, 0.8]],
                vec![0.0, 1.0],
            ),
            "doubling_indicator" | "indicator_half" => {
                ModelSpec::doubling_map(DoublingObservable::IndicatorHalf)
            }
            "doubling_identity" | "centered_identity" => {
                ModelSpec::doubling_map(DoublingObservable::CenteredIdentity)
            }
            other => return Err(Error::invalid(format!("unknown model preset `{other}`"))),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("model spec: {e}")))
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("model spec is always representable as TOML")
    }

    /// Hex SHA-256 of the rendered document.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build(&self) -> Result<ProcessModel> {
        let unexpected = |field: &str| {
            Err(Error::invalid(format!(
                "field `{field}` is not used by family {:?}",
                self.family
            )))
        };
        match self.family {
            Family::Iid => {
                if self.p.is_some() || self.f.is_some() {
                    return unexpected("P/f");
                }
                if self.observable.is_some() {
                    return unexpected("observable");
                }
                let dist = self
                    .dist
                    .clone()
                    .ok_or_else(|| Error::invalid("iid model needs `dist`"))?;
                ProcessModel::iid(dist)
            }
            Family::FiniteMarkov => {
                if self.dist.is_some() {
                    return unexpected("dist");
                }
                if self.observable.is_some() {
                    return unexpected("observable");
                }
                let p = self.p.as_ref().ok_or_else(|| Error::invalid("finite_markov needs `P`"))?;
                let f = self.f.as_ref().ok_or_else(|| Error::invalid("finite_markov needs `f`"))?;
                ProcessModel::finite_markov(p, f)
            }
            Family::DoublingMap => {
                if self.dist.is_some() {
                    return unexpected("dist");
                }
                if self.p.is_some() || self.f.is_some() {
                    return unexpected("P/f");
                }
                let obs = self
                    .observable
                    .clone()
                    .ok_or_else(|| Error::invalid("doubling_map needs `observable`"))?;
                ProcessModel::doubling_map(obs)
            }
        }
    }

    pub fn from_model(model: &ProcessModel) -> Self {
        match model {
            ProcessModel::Iid(m) => ModelSpec::iid(m.dist().clone()),
            ProcessModel::FiniteMarkov(c) => {
                ModelSpec::finite_markov(c.transition_rows(), c.observable().to_vec())
            }
            ProcessModel::DoublingMap(d) => ModelSpec::doubling_map(d.observable().clone()),
        }
    }
}
