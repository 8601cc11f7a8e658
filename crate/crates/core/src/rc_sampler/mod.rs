//! The q = 2 random-cluster measure sampled through its coupling with the
//! continuum Ising model, and an importance-weighting cross-check.

mod chain;
mod importance;
mod spins;

pub use chain::{sw_sweep, ChainState};
pub use importance::{importance_estimate, ImportanceEstimate};
pub use spins::{assign_spins, assign_spins_with, resample_given_spins, SpinConfiguration};
