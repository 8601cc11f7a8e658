//! Exact dense computations for small chains, used as ground truth for the
//! Monte Carlo estimates.
//!
//! Basis states are integers whose bits are the σ³ eigenvalues of the
//! qubits, first qubit most significant, bit 0 meaning spin +1.

mod dense;
mod eigen;
mod hamiltonian;
mod lanczos;
mod states;

pub use dense::DenseOperator;
pub use eigen::{
    householder_ql_eigen, jacobi_eigen, singular_values, symmetric_eigen, tridiagonal_eigen, SpectrumDescending,
    JACOBI_MAX_DIM,
};
pub use hamiltonian::{
    block_qubits, build_hamiltonian, global_flip, ground_state, site_index, spin_of, GroundState, IsingChain,
    FULL_SOLVE_MAX_DIM, MAX_DENSE_SITES, MAX_SPARSE_SITES,
};
pub use lanczos::{lanczos, LanczosResult};
pub use states::{
    entropy, entropy_of_spectrum, ground_density, op_norm_diff, reduce, schmidt, schmidt_block, schmidt_rank,
    thermal_density, weyl_gap, DensityMatrix, StateRef, NEGATIVE_TOL, THERMAL_MAX_DIM, TRACE_TOL,
};
