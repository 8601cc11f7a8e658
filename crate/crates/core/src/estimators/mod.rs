//! Monte Carlo estimates of reduced states from slit boxes.
//!
//! On the box [−m, m+L] × [−β/2, β/2], periodic in time and cut open along
//! [0, L] × {0}, the joint law of the spins just above and below the cut is
//! proportional to the matrix elements of the block's reduced thermal state.
//! The histogram of those spin pairs, divided by its diagonal mass, is
//! therefore an estimate of ρ_m^L(β).

mod experiments;
mod histogram;
mod rdm;

pub use experiments::{
    beta_extrapolate, entropy_scaling_experiment, estimate_rdm, exact_ground_rdm, exact_norm_table, exact_thermal_rdm,
    fit_norm_envelope, norm_decay_experiment, strictly_decreasing_beyond_noise, BetaExtrapolation, BetaLevel, BetaRule,
    EntropyScaling, EntropyScalingConfig, EntropyScalingRow, EnvelopeFit, MRule, NormDecay, NormDecayConfig,
    NormDecayRow,
};
pub use histogram::{block_index, estimate_a, estimate_slit_histogram, SlitHistogram, SlitRun, TallyMode, MAX_HISTOGRAM_L};
pub(crate) use histogram::{leave_one_out, slit_histogram_under};
pub use rdm::{noise_floor, norm_diff_with_se, rdm_from_histogram, RdmEstimate};
