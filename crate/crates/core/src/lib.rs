//! Block self-normalized statistics of stationary sequences.
//!
//! The crate computes block self-normalized sums and Student statistics,
//! exact dependence quantities for finite-state models, the moderate-deviation
//! and Berry–Esseen envelopes (up to their unspecified constants), and runs
//! reproducible Monte Carlo experiments that check tail ratios, Kolmogorov
//! distances, moderate-deviation rates and confidence-interval coverage.

pub mod blockstats;
pub mod bounds;
pub mod conditions;
pub mod error;
mod linalg;
pub mod mc;
pub mod processes;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
