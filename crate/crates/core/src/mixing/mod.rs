//! Ratio weak-mixing checks on the slit box: how nearly the spins above and
//! below the slit factorize, how little a distant spin boundary moves the
//! slit law, and the finite-energy lower bound.

mod checks;
mod exact;
mod separator;

pub use checks::{
    boundary_influence, default_margin, factorization_from_histogram, factorization_ratio, finite_energy_check,
    mixing_sets, mixing_t, plus_boundary, t_quantities, BoundaryInfluence, CellRatio, FactorizationRatio,
    FiniteEnergyReport, FiniteEnergyRow, FiniteEnergyRun, MixingRow, MixingSets, SlitEvent, TQuantities,
    MAX_FINITE_ENERGY_POINTS, MIN_EXPECTED_COUNT,
};
pub use exact::{exact_boundary_influence, exact_factorization_deviation, exact_slit_law, slit_law};
pub use separator::{separates, SeparatorGeometry};
