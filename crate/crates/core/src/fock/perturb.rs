use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::{for_each_two_mode_block, joint_after_channel_fock, joint_entropy_two_mode_nats, joint_sectors, output_spectrum, output_spectrum_two_mode, TransferTables};
use super::density::{entropy_nats, thermal_spectrum, FockDensity};
use super::quadrature::QuadratureSpec;
use crate::error::{Error, Result};
use crate::perturbation::single::{first_derivative_weight, joint_params, joint_weight, second_derivative_weight};
use crate::perturbation::PerturbationSpec;

fn require_positive(ns: f64) -> Result<()> {
    if !(ns > 0.0) || !ns.is_finite() {
        return Err(Error::Domain(format!("perturbation is singular at N_s = {ns}")));
    }
    Ok(())
}

/// Relative eigenvalue corrections `x` with `λ(ε) = λ(1 + εx)` on the
/// product basis (row-major for two modes).
fn relative_corrections(c: &DMatrix<f64>, ns: f64, d: usize) -> Result<Vec<f64>> {
    match c.nrows() {
        1 => Ok((0..d).map(|k| c[(0, 0)] * second_derivative_weight(ns, k)).collect()),
        2 => Ok((0..d * d)
            .map(|i| {
                let (k1, k2) = (i / d, i % d);
                c[(0, 0)] * second_derivative_weight(ns, k1)
                    + c[(1, 1)] * second_derivative_weight(ns, k2)
                    + c[(1, 0)] * first_derivative_weight(ns, k1) * first_derivative_weight(ns, k2)
            })
            .collect()),
        n => Err(Error::InvalidInput(format!("the oracle handles one or two modes, got {n}"))),
    }
}

fn unperturbed(ns: f64, d: usize, modes: usize) -> Vec<f64> {
    let lam = thermal_spectrum(ns, d);
    if modes == 1 {
        lam
    } else {
        (0..d * d).map(|i| lam[i / d] * lam[i % d]).collect()
    }
}

fn perturbed_spectrum(spec: &PerturbationSpec, ns: f64, d: usize) -> Result<Vec<f64>> {
    require_positive(ns)?;
    let x = relative_corrections(&spec.c, ns, d)?;
    let lam = unperturbed(ns, d, spec.modes());
    let scaled: Vec<f64> = x.iter().map(|xi| 1.0 + spec.epsilon * xi).collect();
    let worst = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    if worst < 0.0 {
        let min_eigenvalue = lam.iter().zip(&scaled).map(|(l, s)| l * s).fold(f64::INFINITY, f64::min);
        return Err(Error::EpsilonTooLarge { min_eigenvalue });
    }
    Ok(lam.iter().zip(&scaled).map(|(l, s)| l * s).collect())
}

/// Diagonal input `(1 + ε·f(∂))ρ₀` where `|μ_i|⁴` maps to `∂²/∂N_i²` and
/// `|μ_iμ_j|²` to `∂²/∂N_i∂N_j` of the product thermal state.
pub fn perturbed_state(spec: &PerturbationSpec, ns: f64, d: usize) -> Result<FockDensity> {
    let factors = spec.modes();
    FockDensity::from_diagonal(d, factors, perturbed_spectrum(spec, ns, d)?)
}

/// Finite-difference entropy shifts per `ε²` (nats),
/// `[S(ε) + S(−ε) − 2S(0)]/(2ε²)`, on raw truncated spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleShifts {
    pub ns: f64,
    pub noise: f64,
    pub epsilon: f64,
    pub d: usize,
    pub input: f64,
    pub output: f64,
    pub exchange: f64,
    pub delta_ci: f64,
    /// Truncation deficit of the unperturbed input.
    pub deficit: f64,
}

fn second_difference(f: impl Fn(f64) -> Result<f64>, eps: f64) -> Result<f64> {
    let (plus, minus, zero) = (f(eps)?, f(-eps)?, f(0.0)?);
    Ok((plus + minus - 2.0 * zero) / (2.0 * eps * eps))
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

fn sector_entropy(lam: &[f64], t: &TransferTables) -> f64 {
    joint_sectors(lam, t)
        .iter()
        .map(|s| {
            let eigs: Vec<f64> = s.block.clone().symmetric_eigenvalues().iter().copied().collect();
            entropy_nats(&eigs, 0.0, false)
        })
        .sum()
}

/// Oracle shifts for the `|μ|⁴` perturbation of one mode.
pub fn oracle_shifts_single(ns: f64, noise: f64, eps: f64, d: usize, q: &QuadratureSpec) -> Result<OracleShifts> {
    check_epsilon(eps)?;
    let t = TransferTables::new(noise, d, q)?;
    let state = |e: f64| perturbed_spectrum(&PerturbationSpec::single_mode(e), ns, d);
    let input = second_difference(|e| Ok(entropy_nats(&state(e)?, 0.0, false)), eps)?;
    let output = second_difference(|e| Ok(entropy_nats(&output_spectrum(&state(e)?, &t), 0.0, false)), eps)?;
    let exchange = second_difference(|e| Ok(sector_entropy(&state(e)?, &t)), eps)?;
    let deficit = 1.0 - state(0.0)?.iter().sum::<f64>();
    Ok(OracleShifts { ns, noise, epsilon: eps, d, input, output, exchange, delta_ci: output - exchange, deficit })
}

/// Oracle shifts for the `|μ₁μ₂|²` perturbation of two modes, `d` levels
/// per mode.
pub fn oracle_shifts_two_mode(ns: f64, noise: f64, eps: f64, d: usize, q: &QuadratureSpec) -> Result<OracleShifts> {
    check_epsilon(eps)?;
    let t = TransferTables::new(noise, d, q)?;
    let state = |e: f64| perturbed_spectrum(&PerturbationSpec::two_mode(e), ns, d);
    let input = second_difference(|e| Ok(entropy_nats(&state(e)?, 0.0, false)), eps)?;
    let output = second_difference(|e| Ok(entropy_nats(&output_spectrum_two_mode(&state(e)?, &t), 0.0, false)), eps)?;
    let exchange = second_difference(|e| Ok(joint_entropy_two_mode_nats(&state(e)?, &t, 0.0)), eps)?;
    let deficit = 1.0 - state(0.0)?.iter().sum::<f64>();
    Ok(OracleShifts { ns, noise, epsilon: eps, d, input, output, exchange, delta_ci: output - exchange, deficit })
}

/// Second-order expansion of the exchange entropy per `ε²` (nats) in the
/// eigenbasis of the unperturbed truncated joint state. With `B₁`, `B₂` the
/// first- and second-order parts of the perturbed joint state,
/// `ΔS = Σ_i f′(λ_i)(B₂)_ii + ½Σ_ij |(B₁)_ij|² f′[λ_i, λ_j]`, `f = −x ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeExpansion {
    pub ns: f64,
    pub noise: f64,
    pub d: usize,
    /// Pairs inside a degenerate eigenspace, `−½Σ |B₁|²/λ`.
    pub degenerate: f64,
    /// Pairs with distinct eigenvalues.
    pub cross_spectrum: f64,
    /// `Σ_i f′(λ_i)(B₂)_ii` from the square root in the purification.
    pub purification: f64,
    pub total: f64,
}

/// Relative gap below which two eigenvalues count as degenerate. Truncation
/// splits exact degeneracies of the highly excited levels, so this is loose;
/// distinct levels this close contribute the same value to either bucket.
const DEGENERACY_TOL: f64 = 1e-2;
/// Eigenvalues at or below this are dropped from the expansion.
const SPECTRUM_FLOOR: f64 = 1e-14;

#[derive(Default)]
struct ExpansionSums {
    degenerate: f64,
    cross: f64,
    purification: f64,
}

impl ExpansionSums {
    /// Adds the terms of one block `B₀` whose rows carry relative input
    /// corrections `x`.
    fn add_block(&mut self, b0: DMatrix<f64>, x: &[f64]) {
        let n = x.len();
        let b1 = DMatrix::from_fn(n, n, |i, l| b0[(i, l)] * 0.5 * (x[i] + x[l]));
        let b2 = DMatrix::from_fn(n, n, |i, l| -b0[(i, l)] * (x[i] - x[l]).powi(2) / 8.0);
        let eig = SymmetricEigen::new(b0);
        let v = &eig.eigenvectors;
        let b1e = v.transpose() * b1 * v;
        let b2e = v.transpose() * b2 * v;
        let lam = &eig.eigenvalues;
        for i in 0..n {
            if lam[i] <= SPECTRUM_FLOOR {
                continue;
            }
            self.purification += (-lam[i].ln() - 1.0) * b2e[(i, i)];
            for l in 0..n {
                if lam[l] <= SPECTRUM_FLOOR {
                    continue;
                }
                let w = b1e[(i, l)].powi(2);
                if (lam[i] - lam[l]).abs() <= DEGENERACY_TOL * lam[i].max(lam[l]) {
                    self.degenerate -= 0.5 * w / (0.5 * (lam[i] + lam[l]));
                } else {
                    self.cross -= 0.5 * w * (lam[i].ln() - lam[l].ln()) / (lam[i] - lam[l]);
                }
            }
        }
    }

    fn finish(self, ns: f64, noise: f64, d: usize) -> ExchangeExpansion {
        ExchangeExpansion {
            ns,
            noise,
            d,
            degenerate: self.degenerate,
            cross_spectrum: self.cross,
            purification: self.purification,
            total: self.degenerate + self.cross + self.purification,
        }
    }
}

/// [`ExchangeExpansion`] for the `|μ|⁴` perturbation of one mode.
pub fn exchange_expansion_single(ns: f64, noise: f64, d: usize, q: &QuadratureSpec) -> Result<ExchangeExpansion> {
    require_positive(ns)?;
    let t = TransferTables::new(noise, d, q)?;
    let lam = thermal_spectrum(ns, d);
    let x: Vec<f64> = (0..d).map(|k| second_derivative_weight(ns, k)).collect();
    let mut sums = ExpansionSums::default();
    for sec in joint_sectors(&lam, &t) {
        let xs: Vec<f64> = sec.basis.iter().map(|b| x[b % d]).collect();
        sums.add_block(sec.block, &xs);
    }
    Ok(sums.finish(ns, noise, d))
}

/// [`ExchangeExpansion`] for the `|μ₁μ₂|²` perturbation, `d` levels per mode.
pub fn exchange_expansion_two_mode(ns: f64, noise: f64, d: usize, q: &QuadratureSpec) -> Result<ExchangeExpansion> {
    require_positive(ns)?;
    let t = TransferTables::new(noise, d, q)?;
    let lam2 = unperturbed(ns, d, 2);
    let x = relative_corrections(&PerturbationSpec::two_mode(1.0).c, ns, d)?;
    let mut sums = ExpansionSums::default();
    for_each_two_mode_block(&lam2, &t, |block, refs| {
        let xs: Vec<f64> = refs.iter().map(|&r| x[r]).collect();
        sums.add_block(block, &xs);
    });
    Ok(sums.finish(ns, noise, d))
}

/// Residuals of the ladder identity that moves the perturbation from the
/// input to the reference side of the joint state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderIdentityReport {
    pub j: usize,
    pub ns: f64,
    pub noise: f64,
    pub d: usize,
    /// `‖(E⊗I)(a†ʲb†ʲρ) − v^{−j/2}(I⊗b†ʲbʲ)(E⊗I)ρ‖_F`.
    pub residual: f64,
    /// Same with `a†ʲaʲ` on the channel output in place of `b†ʲbʲ`.
    pub output_side_residual: f64,
    /// `‖(E⊗I)(a†ʲb†ʲρ)‖_F`.
    pub scale: f64,
}

/// `n!/(n−j)!`, zero for `n < j`.
fn falling(n: usize, j: usize) -> f64 {
    if n < j {
        0.0
    } else {
        (0..j).map(|i| (n - i) as f64).product()
    }
}

/// Checks `(E⊗I)a†ʲb†ʲρ^{RQ} = v^{−j/2} b†ʲbʲ ρ^{RQ′}` for the thermal
/// purification, with `a` on the system and `b` on the reference, in a
/// `d`-level truncation where ladder operators drop the top levels.
pub fn check_ladder_identity(j: usize, ns: f64, noise: f64, d: usize, q: &QuadratureSpec) -> Result<LadderIdentityReport> {
    if !(1..=2).contains(&j) {
        return Err(Error::InvalidInput(format!("j must be 1 or 2, got {j}")));
    }
    require_positive(ns)?;
    let t = TransferTables::new(noise, d, q)?;
    let lam = thermal_spectrum(ns, d);
    let amp: Vec<f64> = lam.iter().map(|x| x.sqrt()).collect();
    let v = ns / (ns + 1.0);
    let pref = v.powf(-(j as f64) / 2.0);
    // a†ʲb†ʲ Σ √λ_m |m,m⟩ = Σ (m+j)!/m! √λ_m |m+j,m+j⟩, truncated.
    let shifted: Vec<f64> = (0..d).map(|m| if m >= j { falling(m, j) * amp[m - j] } else { 0.0 }).collect();
    let (mut res, mut res_out, mut scale) = (0.0, 0.0, 0.0);
    for delta in t.deltas() {
        let tab = t.table(delta);
        let m0 = t.offset(delta);
        let n = tab.nrows();
        for i in 0..n {
            let m = m0 + i;
            let qi = (m as isize + delta) as usize;
            for k in 0..n {
                let base = amp[m0 + k] * tab[(i, k)];
                let lhs = shifted[m] * base;
                let rhs = pref * falling(m, j) * amp[m] * base;
                let rhs_out = pref * falling(qi, j) * amp[m] * base;
                scale += lhs * lhs;
                res += (lhs - rhs).powi(2);
                res_out += (lhs - rhs_out).powi(2);
            }
        }
    }
    Ok(LadderIdentityReport { j, ns, noise, d, residual: res.sqrt(), output_side_residual: res_out.sqrt(), scale: scale.sqrt() })
}

/// First-order correction of one joint eigenvalue, `⟨v|B₁|v⟩`, with `v` the
/// eigenvector of the truncated unperturbed joint state whose eigenvalue is
/// closest to `λ_km`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointCorrection {
    pub k: usize,
    pub m: usize,
    pub eigenvalue: f64,
    pub expected_eigenvalue: f64,
    /// Distance to the nearest other eigenvalue in the same sector.
    pub gap: f64,
    pub correction: f64,
}

pub fn joint_eigenvalue_correction(ns: f64, noise: f64, k: usize, m: usize, d: usize, q: &QuadratureSpec) -> Result<JointCorrection> {
    require_positive(ns)?;
    let t = TransferTables::new(noise, d, q)?;
    let lam = thermal_spectrum(ns, d);
    let x: Vec<f64> = (0..d).map(|i| second_derivative_weight(ns, i)).collect();
    let target = joint_weight(&joint_params(ns, noise), k, m);
    let mut best: Option<JointCorrection> = None;
    for sec in joint_sectors(&lam, &t) {
        let idx: Vec<usize> = sec.basis.iter().map(|b| b % d).collect();
        let eig = SymmetricEigen::new(sec.block.clone());
        for (a, &ev) in eig.eigenvalues.iter().enumerate() {
            if best.as_ref().is_some_and(|b| (b.eigenvalue - target).abs() <= (ev - target).abs()) {
                continue;
            }
            let vec = eig.eigenvectors.column(a);
            let n = idx.len();
            let mut corr = 0.0;
            for i in 0..n {
                for l in 0..n {
                    corr += vec[i] * vec[l] * sec.block[(i, l)] * 0.5 * (x[idx[i]] + x[idx[l]]);
                }
            }
            let gap = eig.eigenvalues.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, &o)| (o - ev).abs()).fold(f64::INFINITY, f64::min);
            best = Some(JointCorrection { k, m, eigenvalue: ev, expected_eigenvalue: target, gap, correction: corr });
        }
    }
    best.ok_or_else(|| Error::Numeric("joint state has no eigenvalues".into()))
}

/// Coherent information (bits) along a cubic, phase-odd perturbation
/// `ρ₀ + ε(a†³ρ₀ + ρ₀a³)` of a thermal input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddPerturbationReport {
    pub ns: f64,
    pub noise: f64,
    pub epsilon: f64,
    pub d: usize,
    pub ci_zero: f64,
    pub ci_plus: f64,
    pub ci_minus: f64,
    /// `[I(ε) − I(−ε)]/2`.
    pub odd_part: f64,
    /// `[I(ε) + I(−ε)]/2 − I(0)`.
    pub even_part: f64,
}

pub fn cubic_perturbed_state(ns: f64, eps: f64, d: usize) -> Result<FockDensity> {
    if !(ns >= 0.0) || !ns.is_finite() {
        return Err(Error::Domain(format!("mean photon number must be non-negative, got {ns}")));
    }
    let lam = thermal_spectrum(ns, d);
    let mut rho = DMatrix::from_fn(d, d, |i, l| Complex64::new(if i == l { lam[i] } else { 0.0 }, 0.0));
    for kk in 0..d.saturating_sub(3) {
        let amp = eps * falling(kk + 3, 3).sqrt() * lam[kk];
        rho[(kk + 3, kk)] += Complex64::new(amp, 0.0);
        rho[(kk, kk + 3)] += Complex64::new(amp, 0.0);
    }
    let state = FockDensity::from_dense(d, 1, rho)?;
    let min_eigenvalue = state.eigenvalues()?[0];
    if min_eigenvalue < -1e-10 {
        return Err(Error::EpsilonTooLarge { min_eigenvalue });
    }
    Ok(state)
}

pub fn odd_perturbation_check(ns: f64, noise: f64, eps: f64, d: usize, q: &QuadratureSpec) -> Result<OddPerturbationReport> {
    check_epsilon(eps)?;
    let ci = |e: f64| -> Result<f64> {
        let rho = cubic_perturbed_state(ns, e, d)?;
        let out = super::channel::apply_thermal_channel(&rho, noise, q)?;
        let joint = joint_after_channel_fock(&rho, noise, q)?;
        let s_out = entropy_nats(&out.eigenvalues()?, 0.0, false);
        let s_joint = entropy_nats(&joint.eigenvalues()?, 0.0, false);
        Ok((s_out - s_joint) / std::f64::consts::LN_2)
    };
    let (ci_zero, ci_plus, ci_minus) = (ci(0.0)?, ci(eps)?, ci(-eps)?);
    Ok(OddPerturbationReport {
        ns,
        noise,
        epsilon: eps,
        d,
        ci_zero,
        ci_plus,
        ci_minus,
        odd_part: 0.5 * (ci_plus - ci_minus),
        even_part: 0.5 * (ci_plus + ci_minus) - ci_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_state_single_mode_eigenvalues() {
        let rho = perturbed_state(&PerturbationSpec::single_mode(1e-3), 2.0, 80).unwrap();
        let lam = thermal_spectrum(2.0, 80);
        let diag = rho.diagonal();
        for k in [0, 1, 5] {
            let kf = k as f64;
            let w = (2.0 - 4.0 * kf / 2.0 + kf * (kf - 1.0) / 4.0) / 9.0;
            assert!((diag[k] - lam[k] * (1.0 + 1e-3 * w)).abs() < 1e-15);
        }
        assert!((rho.trace() - lam.iter().sum::<f64>()).abs() < 1e-12);
        assert!((rho.mean_photons() - thermal_spectrum(2.0, 80).iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>()).abs() < 1e-10);
    }

    #[test]
    fn large_epsilon_rejected() {
        let err = perturbed_state(&PerturbationSpec::single_mode(5.0), 0.5, 20).unwrap_err();
        assert!(matches!(err, Error::EpsilonTooLarge { .. }));
    }

    #[test]
    fn ladder_identity_without_noise() {
        let q = QuadratureSpec::default();
        let r = check_ladder_identity(1, 1.0, 0.0, 20, &q).unwrap();
        assert!(r.residual < 1e-8 * r.scale.max(1.0));
    }

    #[test]
    fn odd_perturbation_has_no_odd_part() {
        let q = QuadratureSpec::default();
        let r = odd_perturbation_check(0.5, 0.1, 1e-3, 8, &q).unwrap();
        assert!(r.odd_part.abs() < 1e-9, "{r:?}");
    }
}
