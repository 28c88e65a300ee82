//! Second-order entropy perturbation of thermal inputs by quartic terms of
//! the characteristic function, `f(μ) = Σ_{i≥j} c_ij|μ_iμ_j|²`.
//!
//! All shifts are per `ε²` and in nats; [`DeltaCiReport::in_bits`] converts.

pub mod critical;
mod moments;
pub mod single;
pub mod two_mode;

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use critical::{
    cached_nc, certify_capacity, delta_ci, find_ns0, nc_residual, solve_nc, Certification, CertificationEvidence, NcSolution, Ns0,
    PerturbationMode, CAVEAT, NS0_GRID,
};
pub use single::{
    delta_ci_single, exchange_entropy_shift_single, exchange_entropy_shift_single_series, input_entropy_shift,
    input_entropy_shift_closed, output_entropy_shift_single, phi_k, phi_prime_km, SeriesValue,
};
pub use two_mode::{
    delta_ci_two_mode, exchange_entropy_shift_two_mode, exchange_entropy_shift_two_mode_blocks,
    output_entropy_shift_two_mode, block_operator,
};

/// Limit of `N_s⁴·ΔI_c` for a single `|μ|⁴` term.
pub const SINGLE_MODE_LIMIT: f64 = -5.0 / 4.0;
/// Limit of `N_s⁴·ΔI_c` for a single `|μ₁μ₂|²` term.
pub const TWO_MODE_LIMIT: f64 = -5.0 / 16.0;
/// Limit of the ratio of exchange to output entropy shifts.
pub const EXCHANGE_RATIO_LIMIT: f64 = 3.0 / 8.0;

/// Shifts of the output and exchange entropies per `ε²` (nats).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCiReport {
    pub ns: f64,
    pub noise: f64,
    pub output_shift: f64,
    pub exchange_shift: f64,
    pub delta_ci: f64,
    pub truncation_error_bound: f64,
}

impl DeltaCiReport {
    pub fn new(ns: f64, noise: f64, output_shift: f64, exchange_shift: f64, truncation_error_bound: f64) -> Self {
        Self { ns, noise, output_shift, exchange_shift, delta_ci: output_shift - exchange_shift, truncation_error_bound }
    }

    pub fn in_bits(&self) -> Self {
        Self {
            output_shift: self.output_shift / LN_2,
            exchange_shift: self.exchange_shift / LN_2,
            delta_ci: self.delta_ci / LN_2,
            truncation_error_bound: self.truncation_error_bound / LN_2,
            ..*self
        }
    }

    /// `exchange_shift / output_shift`.
    pub fn exchange_ratio(&self) -> f64 {
        self.exchange_shift / self.output_shift
    }
}

/// Symmetric coefficient matrix `c` and amplitude `ε` of a quartic
/// perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub c: DMatrix<f64>,
    pub epsilon: f64,
}

impl PerturbationSpec {
    pub fn new(c: DMatrix<f64>, epsilon: f64) -> Result<Self> {
        if c.nrows() != c.ncols() || c.nrows() == 0 {
            return Err(Error::InvalidInput(format!("coefficient matrix must be square, got {}x{}", c.nrows(), c.ncols())));
        }
        if c.iter().any(|x| !x.is_finite()) || !epsilon.is_finite() {
            return Err(Error::InvalidInput("coefficients and epsilon must be finite".into()));
        }
        let asym = (&c - c.transpose()).abs().max();
        if asym > 1e-12 * c.abs().max().max(1.0) {
            return Err(Error::InvalidInput("coefficient matrix must be symmetric".into()));
        }
        if c.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidInput("at least one coefficient must be nonzero".into()));
        }
        Ok(Self { c, epsilon })
    }

    /// `c₁₁ = 1` on one mode.
    pub fn single_mode(epsilon: f64) -> Self {
        Self { c: DMatrix::from_element(1, 1, 1.0), epsilon }
    }

    /// `c₂₁ = c₁₂ = 1` on two modes.
    pub fn two_mode(epsilon: f64) -> Self {
        Self { c: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), epsilon }
    }

    pub fn modes(&self) -> usize {
        self.c.nrows()
    }

    /// `(Σ_i c_ii², Σ_{i>j} c_ij²)`.
    pub fn weights(&self) -> (f64, f64) {
        let n = self.modes();
        let mut diag = 0.0;
        let mut off = 0.0;
        for i in 0..n {
            diag += self.c[(i, i)].powi(2);
            for j in 0..i {
                off += self.c[(i, j)].powi(2);
            }
        }
        (diag, off)
    }
}

/// Shifts for a general quartic perturbation. Cross terms between different
/// monomials do not contribute, so the result is the `c²`-weighted sum of
/// single-mode and two-mode shifts; each unordered pair `i > j` counts once.
pub fn delta_ci_general(spec: &PerturbationSpec, ns: f64, noise: f64) -> Result<DeltaCiReport> {
    let (diag, off) = spec.weights();
    let single = delta_ci_single(ns, noise)?;
    let pair = delta_ci_two_mode(ns, noise)?;
    Ok(DeltaCiReport::new(
        ns,
        noise,
        diag * single.output_shift + off * pair.output_shift,
        diag * single.exchange_shift + off * pair.exchange_shift,
        0.0,
    ))
}

/// Large-`N_s` coefficient of `N_s⁴·ΔI_c`,
/// `−(5/16)(4Σ_i c_ii² + Σ_{i>j} c_ij²)`.
pub fn asymptotic_coefficient(spec: &PerturbationSpec) -> f64 {
    let (diag, off) = spec.weights();
    -(5.0 / 16.0) * (4.0 * diag + off)
}
