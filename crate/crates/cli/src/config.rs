//! Experiment configuration: command-line flags merged over an optional TOML
//! file (`--config`). Flags win; unknown file keys are rejected.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use selfnorm::blockstats::BlockKind;
use selfnorm::processes::{ModelSpec, ProcessModel};
use selfnorm::Error;

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// TOML file with any of these options (flags take precedence)
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Preset model: rademacher, uniform, normal, two_state, doubling_indicator, doubling_identity
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Model specification file (TOML)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// contiguous or interlaced
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Comma list `0,0.5,1` or range `start:stop:step`
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<String>,
    /// Single evaluation point (enumerate)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[arg(long, short = 'R')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// True mean added to the centered data (ci-coverage)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker cap; 0 uses every core
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// csv or structured (JSON)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// Two-sided Wilson confidence level
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    /// phi-mixing, martingale, generic or ci (advise)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Comma list of sample sizes (mdp)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<String>,
    /// `m_n = ⌊n^e⌋` (mdp)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_exponent: Option<f64>,
    /// `a_n = n^{-e}` (mdp)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_exponent: Option<f64>,
    /// Interval union such as `[1,inf)` or `[-3,-2]U[2,5]` (mdp)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    /// Largest lag for the eta coefficients (conditions)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<usize>,
    /// Truncation tolerance for gamma_m (conditions)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    /// Long-run variance override (conditions)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Structured,
}

pub fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl Options {
    /// Loads `--config` (if any) and lays the flags over it.
    pub fn resolve(self) -> Result<Options, Error> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut merged: Options =
            toml::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        let flags = self;
        overlay!(merged, flags; config, model, model_file, n, m, kind, rho, x_grid, x, replicates,
            kappa, mu, seed, threads, out, format, confidence, regime, beta, theta, n_grid,
            m_exponent, a_exponent, set, max_lag, tail_tol, sigma2);
        Ok(merged)
    }

    /// Hex SHA-256 over the experiment-defining fields (not `threads`, `out`, `config`).
    pub fn hash(&self, command: &str, model: Option<&ModelSpec>) -> String {
        let mut canon = self.clone();
        canon.threads = None;
        canon.out = None;
        canon.config = None;
        canon.model_file = None;
        let mut text = format!("command = \"{command}\"\n");
        text.push_str(&toml::to_string(&canon).expect("options serialize"));
        if let Some(spec) = model {
            text.push_str("[model_spec]\n");
            text.push_str(&spec.render());
        }
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T, Error> {
        value.ok_or_else(|| invalid(format!("--{name} is required")))
    }

    pub fn model_spec(&self) -> Result<ModelSpec, Error> {
        match (&self.model, &self.model_file) {
            (Some(_), Some(_)) => Err(invalid("give either --model or --model-file, not both")),
            (Some(name), None) => ModelSpec::preset(name),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                ModelSpec::parse(&text)
            }
            (None, None) => Err(invalid("--model or --model-file is required")),
        }
    }

    pub fn build_model(&self) -> Result<(ModelSpec, ProcessModel), Error> {
        let spec = self.model_spec()?;
        let model = spec.build()?;
        Ok((spec, model))
    }

    pub fn kind(&self) -> Result<BlockKind, Error> {
        self.kind.as_deref().unwrap_or("contiguous").parse()
    }

    pub fn format(&self) -> Result<Format, Error> {
        match self.format.as_deref().unwrap_or("csv") {
            "csv" => Ok(Format::Csv),
            "structured" | "json" => Ok(Format::Structured),
            other => Err(invalid(format!("unknown format `{other}` (csv or structured)"))),
        }
    }

    pub fn seed(&self, spec: Option<&ModelSpec>) -> u64 {
        self.seed.or(spec.and_then(|s| s.seed)).unwrap_or(1)
    }

    pub fn replicates(&self, default: u64) -> Result<u64, Error> {
        let r = self.replicates.unwrap_or(default);
        if r == 0 {
            Err(invalid("R must be >= 1"))
        } else {
            Ok(r)
        }
    }

    pub fn confidence(&self) -> Result<f64, Error> {
        let c = self.confidence.unwrap_or(0.99);
        if c > 0.0 && c < 1.0 {
            Ok(c)
        } else {
            Err(invalid(format!("confidence {c} must lie in (0, 1)")))
        }
    }
}

/// Parses `0,0.5,1` or `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let bad = || invalid(format!("cannot parse grid `{text}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        if count > 1_000_000 {
            return Err(invalid("grid has more than 10^6 points"));
        }
        let inv = 1.0 / step;
        let exact = (inv - inv.round()).abs() < 1e-9;
        return Ok((0..=count)
            .map(|i| {
                if exact {
                    (start * inv.round() + i as f64) / inv.round()
                } else {
                    start + i as f64 * step
                }
            })
            .collect());
    }
    text.split(',').map(num).collect()
}

pub fn parse_sizes(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .or_else(|_| match t.parse::<f64>() {
                    Ok(v) if v.fract() == 0.0 && v >= 1.0 && v < 1e15 => Ok(v as usize),
                    _ => Err(()),
                })
                .map_err(|_| invalid(format!("cannot parse size `{t}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:0.3:0.1").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("1, 2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("0:3:0.1").unwrap().len(), 31);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert_eq!(parse_sizes("1000,1e4").unwrap(), vec![1000, 10000]);
    }

    #[test]
    fn hash_ignores_threads_and_output() {
        let a = Options {
            n: Some(10),
            threads: Some(1),
            ..Default::default()
        };
        let b = Options {
            n: Some(10),
            threads: Some(16),
            out: Some("x.csv".into()),
            ..Default::default()
        };
        assert_eq!(a.hash("tail-ratio", None), b.hash("tail-ratio", None));
        let c = Options {
            n: Some(11),
            ..Default::default()
        };
        assert_ne!(a.hash("tail-ratio", None), c.hash("tail-ratio", None));
    }
}
