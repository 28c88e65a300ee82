//! Coherent information and quantum capacity of the thermal-noise bosonic
//! channel.
//!
//! The crate has two independent computational routes:
//!
//! - the Gaussian route ([`symplectic`], [`channel`], [`perturbation`]) works
//!   with covariance matrices, symplectic spectra and closed-form series;
//! - the Fock route ([`fock`]) simulates the channel as a Gaussian-weighted
//!   integral over displacements in a truncated number basis and is used as a
//!   brute-force oracle for everything the Gaussian route computes.
//!
//! [`verify`] samples energy-constrained covariance matrices to check the
//! extremality statements (directional derivative, trace bound, local
//! maximality) numerically.
//!
//! Entropies are reported in bits unless a function says otherwise; the
//! perturbation engine works in nats, where its asymptotic constants are
//! unit-free.

#![forbid(unsafe_code)]
// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod error;
pub mod fock;
pub mod io;
mod linalg;
pub mod perturbation;
pub mod roots;
pub mod symplectic;
pub mod verify;

pub use channel::{
    asymptotic_capacity, coherent_information, directional_derivative, joint_after_channel,
    mutual_information, squeeze_diagonalization, GaussianChannel, SqueezeDiagonalization,
    ThermalChannel,
};
pub use error::{Error, Result};
pub use symplectic::{
    g_entropy, g_entropy_nats, purify, thermal_cm, CovMatrix, JointCovMatrix, SymplecticForm,
};
