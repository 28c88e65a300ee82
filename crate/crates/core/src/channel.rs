//! Gaussian channels acting on covariance matrices, coherent information and
//! the closed-form single-mode analysis of the thermal-noise channel.

use std::f64::consts::{E, LN_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, max_abs};
use crate::symplectic::{
    entropy_from_symplectic, purify, trace_functional, CovMatrix, JointCovMatrix, SymplecticForm,
};

/// A channel acting on covariance matrices as `γ ↦ Mᵀ γ M + N`.
pub trait GaussianMap {
    fn modes(&self) -> Option<usize>;
    fn transfer(&self, n: usize) -> DMatrix<f64>;
    fn noise_matrix(&self, n: usize) -> DMatrix<f64>;
}

/// General Gaussian channel with transfer matrix `m` and noise `nmat`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    pub n: usize,
    pub m: DMatrix<f64>,
    pub nmat: DMatrix<f64>,
}

impl GaussianChannel {
    /// Builds the channel and checks complete positivity,
    /// `N + i(J − MᵀJM) ⪰ 0`.
    pub fn new(n: usize, m: DMatrix<f64>, nmat: DMatrix<f64>) -> Result<Self> {
        for mat in [&m, &nmat] {
            if mat.nrows() != 2 * n || mat.ncols() != 2 * n {
                return Err(Error::DimensionMismatch { expected: 2 * n, got: mat.nrows() });
            }
        }
        let ch = Self { n, m, nmat };
        let min = ch.cp_min_eigenvalue()?;
        if min < -1e-9 {
            return Err(Error::Domain(format!("channel is not completely positive (min eigenvalue {min:e})")));
        }
        Ok(ch)
    }

    /// Smallest eigenvalue of `N + i(J − MᵀJM)`.
    pub fn cp_min_eigenvalue(&self) -> Result<f64> {
        let j = SymplecticForm::standard(self.n).matrix();
        let skew = &j - self.m.transpose() * &j * &self.m;
        let h = DMatrix::from_fn(2 * self.n, 2 * self.n, |r, c| Complex64::new(self.nmat[(r, c)], skew[(r, c)]));
        Ok(hermitian_eigenvalues(&h)?[0])
    }
}

impl GaussianMap for GaussianChannel {
    fn modes(&self) -> Option<usize> {
        Some(self.n)
    }

    fn transfer(&self, _n: usize) -> DMatrix<f64> {
        self.m.clone()
    }

    fn noise_matrix(&self, _n: usize) -> DMatrix<f64> {
        self.nmat.clone()
    }
}

/// Classical additive Gaussian noise: `M = I`, `N = 2N·I` on every mode.
/// `noise` is the mean photon number the channel produces from vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalChannel {
    pub noise: f64,
}

impl ThermalChannel {
    pub fn new(noise: f64) -> Result<Self> {
        if !(noise >= 0.0) || !noise.is_finite() {
            return Err(Error::Domain(format!("noise must be a non-negative number, got {noise}")));
        }
        Ok(Self { noise })
    }
}

impl GaussianMap for ThermalChannel {
    fn modes(&self) -> Option<usize> {
        None
    }

    fn transfer(&self, n: usize) -> DMatrix<f64> {
        DMatrix::identity(2 * n, 2 * n)
    }

    fn noise_matrix(&self, n: usize) -> DMatrix<f64> {
        DMatrix::identity(2 * n, 2 * n) * (2.0 * self.noise)
    }
}

fn check_modes(ch: &impl GaussianMap, n: usize) -> Result<()> {
    match ch.modes() {
        Some(m) if m != n => Err(Error::DimensionMismatch { expected: 2 * m, got: 2 * n }),
        _ => Ok(()),
    }
}

pub fn apply_channel(cm: &CovMatrix, ch: &impl GaussianMap) -> Result<CovMatrix> {
    check_modes(ch, cm.n)?;
    let m = ch.transfer(cm.n);
    CovMatrix::new(cm.n, m.transpose() * &cm.gamma * &m + ch.noise_matrix(cm.n))
}

/// Channel applied to the system half of the purification of `cm`.
pub fn joint_after_channel(cm: &CovMatrix, ch: &impl GaussianMap) -> Result<JointCovMatrix> {
    check_modes(ch, cm.n)?;
    let psi = purify(cm)?;
    let n = cm.n;
    let k = 2 * n;
    let m = ch.transfer(n);
    let beta = psi.beta();
    let mut g = psi.gamma.clone();
    let top = m.transpose() * &cm.gamma * &m + ch.noise_matrix(n);
    let cross = m.transpose() * &beta;
    g.view_mut((0, 0), (k, k)).copy_from(&top);
    g.view_mut((0, k), (k, k)).copy_from(&cross);
    g.view_mut((k, 0), (k, k)).copy_from(&cross.transpose());
    JointCovMatrix::new(n, g)
}

/// `S(E(ρ)) − S(ρ^{RQ′})` in bits.
pub fn coherent_information(cm: &CovMatrix, ch: &ThermalChannel) -> Result<f64> {
    let (out, exchange) = output_and_exchange(cm, ch)?;
    Ok(out - exchange)
}

/// `S(ρ) + S(E(ρ)) − S(ρ^{RQ′})` in bits.
pub fn mutual_information(cm: &CovMatrix, ch: &ThermalChannel) -> Result<f64> {
    let input = cm.entropy()?;
    let (out, exchange) = output_and_exchange(cm, ch)?;
    Ok(input + out - exchange)
}

fn output_and_exchange(cm: &CovMatrix, ch: &ThermalChannel) -> Result<(f64, f64)> {
    if ch.noise == 0.0 {
        // Identity channel: the joint state is the purification itself.
        purify(cm)?;
        return Ok((cm.entropy()?, 0.0));
    }
    let out = apply_channel(cm, ch)?.entropy()?;
    let exchange = joint_after_channel(cm, ch)?.entropy()?;
    Ok((out, exchange))
}

/// Two-mode squeeze that diagonalizes the joint state of a thermal input
/// and its reference after the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeDiagonalization {
    pub r: f64,
    pub nu_a: f64,
    pub nu_b: f64,
    pub v_a: f64,
    pub v_b: f64,
}

impl SqueezeDiagonalization {
    /// Exchange entropy `g((ν_A−1)/2) + g((ν_B−1)/2)` in bits.
    pub fn exchange_entropy(&self) -> f64 {
        entropy_from_symplectic(&[self.nu_a, self.nu_b]).unwrap_or(f64::NAN)
    }
}

/// `tanh 2r` written with the per-mode energy `Ē = N_s + ½`.
pub fn tanh_2r_energy_form(e_bar: f64, noise: f64) -> f64 {
    (4.0 * e_bar * e_bar - 1.0).max(0.0).sqrt() / (2.0 * e_bar + noise)
}

/// `tanh 2r` written with photon numbers, `N′ = N_s + N`.
pub fn tanh_2r_photon_form(ns: f64, noise: f64) -> f64 {
    2.0 * (ns * (ns + 1.0)).sqrt() / (ns + (ns + noise) + 1.0)
}

/// `S₁(r) = [[cosh r·I, −sinh r·J], [sinh r·J, cosh r·I]]` on a
/// system/reference mode pair.
pub fn two_mode_squeezer(r: f64) -> DMatrix<f64> {
    squeezer_on_pairs(1, r)
}

/// `S₁(r)` applied to each pair `(Q_i, R_i)` of an `n`-mode joint system.
pub fn squeezer_on_pairs(n: usize, r: f64) -> DMatrix<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for i in 0..n {
        let q = 2 * i;
        let p = 2 * n + 2 * i;
        for k in 0..2 {
            m[(q + k, q + k)] = c;
            m[(p + k, p + k)] = c;
        }
        // −sinh r·J in the (Q, R) block, +sinh r·J in the (R, Q) block.
        m[(q, p + 1)] = s;
        m[(q + 1, p)] = -s;
        m[(p, q + 1)] = -s;
        m[(p + 1, q)] = s;
    }
    m
}

/// Diagonalizes the single-mode joint CM `[[(2N_s+2N+1)I, β], [βᵀ, (2N_s+1)I]]`
/// with [`two_mode_squeezer`] and reads off the symplectic eigenvalues.
pub fn squeeze_diagonalization(ns: f64, noise: f64) -> Result<SqueezeDiagonalization> {
    if !(ns >= 0.0) || !(noise >= 0.0) || !ns.is_finite() || !noise.is_finite() {
        return Err(Error::Domain(format!("need N_s ≥ 0 and N ≥ 0, got N_s={ns}, N={noise}")));
    }
    if ns == 0.0 && noise == 0.0 {
        return Ok(SqueezeDiagonalization { r: 0.0, nu_a: 1.0, nu_b: 1.0, v_a: 0.0, v_b: 0.0 });
    }
    let r = 0.5 * tanh_2r_photon_form(ns, noise).atanh();
    let joint = joint_after_channel(&crate::symplectic::thermal_cm(ns, 1)?, &ThermalChannel::new(noise)?)?;
    let s = two_mode_squeezer(r);
    let d = &s * &joint.gamma * s.transpose();
    let off = max_abs(&(DMatrix::from_diagonal(&d.diagonal()) - &d));
    if off > 1e-8 * max_abs(&d).max(1.0) {
        return Err(Error::Numeric(format!("two-mode squeeze left off-diagonal residue {off:e}")));
    }
    let nu_a = 0.5 * (d[(0, 0)] + d[(1, 1)]);
    let nu_b = (0.5 * (d[(2, 2)] + d[(3, 3)])).max(1.0);
    Ok(SqueezeDiagonalization { r, nu_a, nu_b, v_a: thermal_parameter(nu_a), v_b: thermal_parameter(nu_b) })
}

/// `(ν − 1)/(ν + 1)`.
pub fn thermal_parameter(nu: f64) -> f64 {
    (nu - 1.0) / (nu + 1.0)
}

/// Closed-form joint symplectic eigenvalues `(ν_A, ν_B)` for a thermal input:
/// `ν = √((N+1)² + 4N·N_s) ± N`.
pub fn joint_symplectic_closed_form(ns: f64, noise: f64) -> (f64, f64) {
    let s = ((noise + 1.0).powi(2) + 4.0 * noise * ns).sqrt();
    (s + noise, s - noise)
}

/// Derivative of the coherent information (bits) along the state-space
/// mixture from the thermal input towards the Gaussian state `probe`,
/// both at energy `n(N_s + ½)`.
///
/// Only the exchange term contributes at equal energy, giving
/// `−¼·log₂(v_A v_B)·sinh 2r·(T(γ) − 2n√(4Ē²−1))` with `T` the
/// [`trace_functional`].
pub fn directional_derivative(probe: &CovMatrix, ns: f64, ch: &ThermalChannel) -> Result<f64> {
    if !(ns > 0.0) {
        return Err(Error::Domain(format!("thermal reference needs N_s > 0, got {ns}")));
    }
    if ch.noise <= 0.0 {
        return Err(Error::Domain("directional derivative needs N > 0 (the joint state is pure at N = 0)".into()));
    }
    let n = probe.n as f64;
    let e_bar = ns + 0.5;
    let energy = probe.energy();
    let expected = n * e_bar;
    if (energy - expected).abs() > 1e-9 * expected.max(1.0) {
        return Err(Error::Constraint { expected, got: energy });
    }
    let sd = squeeze_diagonalization(ns, ch.noise)?;
    let t = trace_functional(probe)?;
    let bound = 2.0 * n * (4.0 * e_bar * e_bar - 1.0).sqrt();
    Ok(-0.25 * (sd.v_a * sd.v_b).log2() * (2.0 * sd.r).sinh() * (t - bound))
}

/// `max{0, −log₂(eN)}`; infinite at `N = 0`.
pub fn asymptotic_capacity(noise: f64) -> Result<f64> {
    if !(noise >= 0.0) || noise.is_nan() {
        return Err(Error::Domain(format!("noise must be non-negative, got {noise}")));
    }
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    if noise * E >= 1.0 {
        return Ok(0.0);
    }
    Ok((-(1.0 + noise.ln()) / LN_2).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{g_entropy, thermal_cm};

    fn ch(n: f64) -> ThermalChannel {
        ThermalChannel::new(n).unwrap()
    }

    #[test]
    fn apply_examples() {
        let out = apply_channel(&CovMatrix::vacuum(1), &ch(0.5)).unwrap();
        assert!((out.gamma - DMatrix::identity(2, 2) * 2.0).abs().max() < 1e-15);
        let g = thermal_cm(1.0, 1).unwrap();
        assert_eq!(apply_channel(&g, &ch(0.0)).unwrap(), g);
        let out = apply_channel(&g, &ch(0.1)).unwrap();
        assert!((out.gamma - DMatrix::identity(2, 2) * 3.2).abs().max() < 1e-14);
    }

    #[test]
    fn general_channel_matches_thermal() {
        let g = thermal_cm(0.7, 2).unwrap();
        let gen = GaussianChannel::new(2, DMatrix::identity(4, 4), DMatrix::identity(4, 4) * 0.6).unwrap();
        let a = apply_channel(&g, &gen).unwrap();
        let b = apply_channel(&g, &ch(0.3)).unwrap();
        assert!((a.gamma - b.gamma).abs().max() < 1e-15);
    }

    #[test]
    fn non_cp_channel_rejected() {
        // Ideal amplification without added noise violates complete positivity.
        let m = DMatrix::identity(2, 2) * 2.0;
        assert!(GaussianChannel::new(1, m, DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn ci_identity_channel() {
        let g = thermal_cm(1.3, 1).unwrap();
        let ci = coherent_information(&g, &ch(0.0)).unwrap();
        assert!((ci - g_entropy(1.3).unwrap()).abs() < 1e-12);
        let mi = mutual_information(&g, &ch(0.0)).unwrap();
        assert!((mi - 2.0 * g_entropy(1.3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn vacuum_input() {
        let j = joint_after_channel(&CovMatrix::vacuum(1), &ch(0.5)).unwrap();
        assert!((j.entropy().unwrap() - g_entropy(0.5).unwrap()).abs() < 1e-10);
        assert!(mutual_information(&CovMatrix::vacuum(1), &ch(0.5)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn squeeze_matches_closed_form() {
        for &(ns, n) in &[(0.3, 0.1), (1.0, 0.1), (2.0, 0.5), (50.0, 0.05)] {
            let sd = squeeze_diagonalization(ns, n).unwrap();
            let (a, b) = joint_symplectic_closed_form(ns, n);
            assert!((sd.nu_a - a).abs() < 1e-9 * a, "{ns} {n}");
            assert!((sd.nu_b - b).abs() < 1e-9 * a, "{ns} {n}");
            let e = tanh_2r_energy_form(ns + 0.5, n);
            assert!((e - tanh_2r_photon_form(ns, n)).abs() < 1e-15);
        }
    }

    #[test]
    fn squeeze_edge_cases() {
        let sd = squeeze_diagonalization(0.0, 0.4).unwrap();
        assert_eq!(sd.r, 0.0);
        assert!((sd.nu_a - 1.8).abs() < 1e-12 && (sd.nu_b - 1.0).abs() < 1e-12);
        let sd = squeeze_diagonalization(0.0, 0.0).unwrap();
        assert_eq!((sd.r, sd.nu_a, sd.nu_b), (0.0, 1.0, 1.0));
    }

    #[test]
    fn squeezer_is_symplectic_for_flipped_form() {
        let s = squeezer_on_pairs(2, 0.37);
        assert!(crate::symplectic::symplectic_defect(&s, SymplecticForm::flipped_joint(2)) < 1e-13);
    }

    #[test]
    fn capacity_examples() {
        assert!((asymptotic_capacity(0.1).unwrap() - 1.879_233).abs() < 1e-6);
        assert_eq!(asymptotic_capacity(1.0 / E).unwrap(), 0.0);
        assert_eq!(asymptotic_capacity(0.5).unwrap(), 0.0);
        assert!(asymptotic_capacity(0.0).unwrap().is_infinite());
        assert!(asymptotic_capacity(-0.1).is_err());
    }

    #[test]
    fn directional_at_reference_is_zero() {
        let d = directional_derivative(&thermal_cm(1.5, 2).unwrap(), 1.5, &ch(0.1)).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn directional_rejects_energy_mismatch() {
        let err = directional_derivative(&thermal_cm(1.0, 1).unwrap(), 1.5, &ch(0.1));
        assert!(matches!(err, Err(Error::Constraint { .. })));
    }
}
