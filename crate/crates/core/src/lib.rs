//! Continuum random-cluster representation of the transverse-field Ising
//! chain: space-time percolation, a Swendsen-Wang style sampler, Monte Carlo
//! estimators of reduced density matrices from slit boxes, exact
//! diagonalization for cross-checks, and the branching and entropy bounds the
//! estimates are tested against.

pub mod bounds;
pub mod disorder;
pub mod dsu;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod mixing;
pub mod parallel;
pub mod percolation;
pub mod quantum_oracle;
pub mod rc_sampler;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
