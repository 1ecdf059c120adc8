//! Block sums and self-normalized statistics of a realized sample path.
//!
//! A sample `x_1, …, x_n` is cut into `k` blocks of length `m`. In the
//! contiguous scheme the blocks are `{m(j−1)+1, …, mj}` for `j = 1..=k` with
//! `k = ⌊n/m⌋`; in the interlaced scheme only every other block of length `m`
//! is kept, `{2m(j−1)+1, …, 2mj−m}` with `k = ⌊n/(2m)⌋`. Observations past the
//! last block are dropped.
//!
//! Summation order is fixed: left to right inside a block, then block index
//! order. For a given input the results are bit-reproducible.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Contiguous,
    Interlaced,
}

impl std::fmt::Display for BlockKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockKind::Contiguous => write!(f, "contiguous"),
            BlockKind::Interlaced => write!(f, "interlaced"),
        }
    }
}

impl std::str::FromStr for BlockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contiguous" => Ok(BlockKind::Contiguous),
            "interlaced" => Ok(BlockKind::Interlaced),
            other => Err(Error::invalid(format!("unknown block kind `{other}`"))),
        }
    }
}

/// Partition of `1..=n` into `k` equal-length index blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockScheme {
    n: usize,
    m: usize,
    k: usize,
    kind: BlockKind,
}

impl BlockScheme {
    pub fn new(n: usize, m: usize, kind: BlockKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("sample length n must be positive"));
        }
        if m == 0 || m > n {
            return Err(Error::invalid(format!("block length m={m} outside [1, {n}]")));
        }
        let k = match kind {
            BlockKind::Contiguous => n / m,
            BlockKind::Interlaced => {
                if 2 * m > n {
                    return Err(Error::invalid(format!(
                        "interlaced blocks need 2m <= n (m={m}, n={n})"
                    )));
                }
                n / (2 * m)
            }
        };
        Ok(BlockScheme { n, m, k, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    /// Distance between the starts of consecutive blocks.
    fn stride(&self) -> usize {
        match self.kind {
            BlockKind::Contiguous => self.m,
            BlockKind::Interlaced => 2 * self.m,
        }
    }

    /// Zero-based half-open index range of block `j` (0-based).
    pub fn block(&self, j: usize) -> Range<usize> {
        assert!(j < self.k, "block index {j} out of range (k={})", self.k);
        let start = j * self.stride();
        start..start + self.m
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.k).map(move |j| self.block(j))
    }

    /// One past the last sample index read by any block.
    pub fn used_len(&self) -> usize {
        match self.k {
            0 => 0,
            k => self.block(k - 1).end,
        }
    }

    /// Number of trailing observations that fall after the last block.
    pub fn dropped(&self) -> usize {
        self.n - self.used_len()
    }
}

/// Sum of the sample over each block of `scheme`.
pub fn block_sums(sample: &[f64], scheme: &BlockScheme) -> Result<Vec<f64>> {
    if sample.len() != scheme.n() {
        return Err(Error::invalid(format!(
            "sample has length {} but the scheme expects {}",
            sample.len(),
            scheme.n()
        )));
    }
    let mut out = Vec::with_capacity(scheme.k());
    block_sums_into(sample, scheme, &mut out);
    Ok(out)
}

/// Allocation-free variant used by the replication engine. `sample` may be
/// shorter than `n` as long as it covers `scheme.used_len()`.
pub(crate) fn block_sums_into(sample: &[f64], scheme: &BlockScheme, out: &mut Vec<f64>) {
    out.clear();
    for r in scheme.blocks() {
        let mut s = 0.0;
        for &v in &sample[r] {
            s += v;
        }
        out.push(s);
    }
}

/// Block sums together with the self-normalized ratio `ΣS_j / (ΣS_j²)^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStatistics {
    pub block_sums: Vec<f64>,
    pub v_squared: f64,
    /// `None` marks the degenerate outcome `v_squared == 0`.
    pub w: Option<f64>,
}

impl BlockStatistics {
    pub fn is_degenerate(&self) -> bool {
        self.w.is_none()
    }
}

/// Returns `(Σ s, Σ s²)` summed left to right.
#[inline]
pub(crate) fn sum_and_squares(block_sums: &[f64]) -> (f64, f64) {
    let mut s = 0.0;
    let mut v2 = 0.0;
    for &b in block_sums {
        s += b;
        v2 += b * b;
    }
    (s, v2)
}

#[inline]
pub(crate) fn ratio(sum: f64, v_squared: f64) -> Option<f64> {
    if v_squared > 0.0 {
        Some(sum / v_squared.sqrt())
    } else {
        None
    }
}

pub fn self_normalized(block_sums: Vec<f64>) -> BlockStatistics {
    let (s, v_squared) = sum_and_squares(&block_sums);
    BlockStatistics {
        w: ratio(s, v_squared),
        block_sums,
        v_squared,
    }
}

/// Which form of the t-statistic / self-normalized threshold identity to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChungForm {
    /// `x (k / (k + x² − 1))^{1/2}`, the classical Student statistic.
    Plain,
    /// `x (k/(k−1))^{1/2} (k / (k + x² − 1))^{1/2}`, the variant stated for
    /// the block-centered statistic used by the mean confidence interval.
    Centered,
}

/// Threshold `t(x)` on the self-normalized sum matching the event `{T ≥ x}`.
pub fn chung_threshold(x: f64, k: usize, form: ChungForm) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid(format!("Chung threshold needs k >= 2, got {k}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("threshold argument x={x} must be finite and >= 0")));
    }
    let kf = k as f64;
    let plain = x * (kf / (kf + x * x - 1.0)).sqrt();
    Ok(match form {
        ChungForm::Plain => plain,
        ChungForm::Centered => plain * (kf / (kf - 1.0)).sqrt(),
    })
}

/// Centered sum of squares `Σ(Y_j − Ȳ)²` and the grand sum `ΣY_j`.
pub(crate) fn centered_ss(block_sums: &[f64]) -> (f64, f64) {
    let total: f64 = block_sums.iter().sum();
    let mean = total / block_sums.len() as f64;
    let ss = block_sums.iter().map(|y| (y - mean) * (y - mean)).sum();
    (ss, total)
}

/// Block Student statistic `Σ(Y_j − mμ) / (Σ(Y_j − Ȳ)²)^{1/2}`.
pub fn student_t(block_sums: &[f64], m: usize, mu: f64) -> Result<f64> {
    if block_sums.len() < 2 {
        return Err(Error::invalid("Student statistic needs at least two blocks"));
    }
    if m == 0 {
        return Err(Error::invalid("block length m must be positive"));
    }
    let (ss, _) = centered_ss(block_sums);
    if !(ss > 0.0) {
        return Err(Error::DegenerateStatistic(
            "zero centered sum of squares".into(),
        ));
    }
    let shift = m as f64 * mu;
    let num: f64 = block_sums.iter().map(|y| y - shift).sum();
    Ok(num / ss.sqrt())
}
