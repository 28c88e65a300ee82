//! Truncated Fock-space oracle: the thermal-noise channel as a
//! Gaussian-weighted average of displacements, applied by quadrature.

mod channel;
mod density;
mod displacement;
mod perturb;
mod quadrature;

pub use channel::{
    apply_thermal_channel, coherent_information_fock, joint_after_channel_fock, partial_trace_reference, FockCiReport, TransferTables,
};
pub use density::{number_state, thermal_fock, von_neumann_entropy, von_neumann_entropy_with, FockDensity, Repr, Sector};
pub use displacement::{displacement_leakage, displacement_matrix};
pub use perturb::{
    check_ladder_identity, cubic_perturbed_state, exchange_expansion_single, exchange_expansion_two_mode, joint_eigenvalue_correction, odd_perturbation_check, oracle_shifts_single,
    oracle_shifts_two_mode, perturbed_state, ExchangeExpansion, JointCorrection, LadderIdentityReport, OddPerturbationReport, OracleShifts,
};
pub use quadrature::{gauss_legendre, Node, QuadratureSpec};
