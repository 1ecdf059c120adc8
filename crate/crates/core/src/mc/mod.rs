//! Replication engine and exact enumeration oracle.
//!
//! Replicate `r` always draws from `RngStream::new(seed, r)` and workers only
//! return per-replicate values or integer counts, so every result is
//! identical for any thread count.

mod berry_esseen;
mod coverage;
mod engine;
mod enumerate;
mod mdp;
mod stats;
mod tail;

pub use berry_esseen::{berry_esseen_empirical, ks_distance, BerryEsseen};
pub use coverage::{ci_coverage, CoverageReport};
pub use engine::{replicate_statistic, simulate_w, RunSettings};
pub use enumerate::{enumerate_exact, enumerate_law, ExactLaw, ExactTail};
pub use mdp::{mdp_empirical, MdpConfig, MdpPoint};
pub use stats::wilson_interval;
pub use tail::{default_x_grid, run_tail_curve, RunMeta, TailCurve, MIN_RELIABLE_COUNT};
