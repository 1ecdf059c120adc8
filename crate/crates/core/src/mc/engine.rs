use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockstats::{block_sums_into, ratio, sum_and_squares, BlockKind, BlockScheme};
use crate::error::{Error, Result};
use crate::processes::{IidDist, ProcessModel};
use crate::rng::RngStream;

/// Replicate count, master seed and worker cap (`threads = 0` uses every core).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSettings {
    pub replicates: u64,
    pub seed: u64,
    pub threads: usize,
}

impl RunSettings {
    pub fn new(replicates: u64, seed: u64) -> Self {
        RunSettings {
            replicates,
            seed,
            threads: 0,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            Err(Error::invalid("R must be >= 1"))
        } else {
            Ok(())
        }
    }
}

pub(crate) fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Per-worker scratch space for one `(model, scheme)` pair.
pub(crate) struct Kernel<'a> {
    model: &'a ProcessModel,
    scheme: &'a BlockScheme,
    rademacher: bool,
    sample: Vec<f64>,
    sums: Vec<f64>,
}

impl<'a> Kernel<'a> {
    pub(crate) fn new(model: &'a ProcessModel, scheme: &'a BlockScheme) -> Self {
        let rademacher = matches!(model, ProcessModel::Iid(m) if *m.dist() == IidDist::Rademacher);
        Kernel {
            model,
            scheme,
            rademacher,
            sample: vec![0.0; scheme.n()],
            sums: Vec::with_capacity(scheme.k()),
        }
    }

    /// Fresh sample for replicate `r` followed by its block sums.
    pub(crate) fn block_sums(&mut self, seed: u64, r: u64, shift: f64) -> &[f64] {
        self.model.fill(&mut RngStream::new(seed, r), &mut self.sample);
        if shift != 0.0 {
            for v in self.sample.iter_mut() {
                *v += shift;
            }
        }
        block_sums_into(&self.sample, self.scheme, &mut self.sums);
        &self.sums
    }

    /// Block self-normalized sum of replicate `r`; `None` when `V = 0`.
    pub(crate) fn w(&mut self, seed: u64, r: u64) -> Option<f64> {
        if self.rademacher {
            return self.rademacher_w(seed, r);
        }
        let sums = self.block_sums(seed, r, 0.0);
        let (s, v2) = sum_and_squares(sums);
        ratio(s, v2)
    }

    /// Reads the same bits as the generic path. Every partial sum is an
    /// integer below 2^53, so `s` and `v2` are exact in any order and the
    /// result is bit-identical.
    fn rademacher_w(&mut self, seed: u64, r: u64) -> Option<f64> {
        let mut rng = RngStream::new(seed, r);
        let mut bits = rng.bits();
        let m = self.scheme.m();
        let interlaced = self.scheme.kind() == BlockKind::Interlaced;
        if m == 1 && !interlaced {
            let k = self.scheme.k();
            let s = 2.0 * bits.count_ones(k) as f64 - k as f64;
            return ratio(s, k as f64);
        }
        let (mut s, mut v2) = (0.0, 0.0);
        for _ in 0..self.scheme.k() {
            let b = 2.0 * bits.count_ones(m) as f64 - m as f64;
            s += b;
            v2 += b * b;
            if interlaced {
                bits.count_ones(m);
            }
        }
        ratio(s, v2)
    }
}

/// `W` for a single replicate.
pub fn replicate_statistic(model: &ProcessModel, scheme: &BlockScheme, seed: u64, r: u64) -> Option<f64> {
    Kernel::new(model, scheme).w(seed, r)
}

/// All replicate values of `W`, in replicate order.
pub fn simulate_w(model: &ProcessModel, scheme: &BlockScheme, run: &RunSettings) -> Result<Vec<Option<f64>>> {
    run.validate()?;
    in_pool(run.threads, || {
        (0..run.replicates)
            .into_par_iter()
            .map_init(|| Kernel::new(model, scheme), |k, r| k.w(run.seed, r))
            .collect()
    })
}

/// Folds every replicate's `W` into an accumulator. `merge` must be
/// associative and commutative on the values produced (integer counts are).
pub(crate) fn fold_w<A, I, S, M>(
    model: &ProcessModel,
    scheme: &BlockScheme,
    run: &RunSettings,
    init: I,
    step: S,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, Option<f64>) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    run.validate()?;
    in_pool(run.threads, || {
        (0..run.replicates)
            .into_par_iter()
            .fold(
                || (Kernel::new(model, scheme), init()),
                |(mut kernel, mut acc), r| {
                    let w = kernel.w(run.seed, r);
                    step(&mut acc, w);
                    (kernel, acc)
                },
            )
            .map(|(_, acc)| acc)
            .reduce(&init, &merge)
    })
}
