//! Random environments of couplings and fields: sampling, the `d_q` metric,
//! the environment events that gate the disordered entropy bound, and
//! quenched connectivity scans that supply the localization radii `D_x`.
//!
//! `D_x` here is empirical: the smallest scanned distance beyond which the
//! connectivity from `(x, 0)` stays under `e^{−γ d_q}`.

mod environment;
mod events;
mod scan;

pub use environment::{sample_environment, Distribution, Environment, EnvironmentSpec};
pub use events::{
    compute_xl, dq_distance, environment_events, log_margin, z_value, EnvironmentEvents, EventParams, Indicator,
    LocalizationRadii, XlTrace,
};
pub use scan::{
    disorder_events_experiment, disordered_decay_scan, localization_radius, mean_z, DecayScan, DisorderEventRow,
    DisorderEvents, DisorderEventsConfig, EventFrequency, ScanConfig, ScanRow, BETA_CAP,
};
