//! Executable forms of the quantitative bounds: the branching comparison for
//! percolation decay, the entropy bound built from norm decay, and the
//! decay-rate fits that connect them to measurements.

mod branching;
mod entropy;
mod fit;

pub use branching::{
    decay_rate_bound, lifetime_tail_exponent, offspring_pgf, offspring_pmf, progeny_tail_exponent, simulate_branching,
    simulate_offspring, BranchingParams, BranchingSample, DecayRateBound, GENERATION_CAP,
};
pub use entropy::{
    eigenvalue_tail_check, entropy_bound_pipeline, entropy_bound_uniform, BoundBranch, EntropyBound, EntropyBoundInputs,
    TailCheckReport,
};
pub use fit::{fit_decay_rate, DecayFit};
