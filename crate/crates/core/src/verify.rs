//! Seeded numerical checks of the extremality of the thermal input.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{coherent_information, directional_derivative, ThermalChannel};
use crate::error::{Error, Result};
use crate::perturbation::{delta_ci, find_ns0, PerturbationMode, SINGLE_MODE_LIMIT, TWO_MODE_LIMIT};
use crate::roots::sign_changes;
use crate::symplectic::{beam_splitter, rotation, squeezer, thermal_cm, trace_functional, CovMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// Random rotations, beam splitters and single-mode squeezes.
    #[default]
    SqueezeRotate,
    /// As above, preceded by a two-mode squeeze on each neighbouring pair.
    CorrelatedTwoMode,
}

/// Seeded family of Gaussian states with `Tr γ = 4nĒ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeEnsemble {
    pub n: usize,
    pub e_bar: f64,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub kind: ProbeKind,
    /// Squeeze factors up to 10 instead of 2.
    #[serde(default)]
    pub wide: bool,
}

impl ProbeEnsemble {
    pub fn new(n: usize, e_bar: f64, count: usize, seed: u64) -> Result<Self> {
        let e = Self { n, e_bar, count, seed, kind: ProbeKind::SqueezeRotate, wide: false };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("ensemble needs at least one mode".into()));
        }
        if !(self.e_bar >= 0.5) || !self.e_bar.is_finite() {
            return Err(Error::Domain(format!("energy per mode must be at least 1/2, got {}", self.e_bar)));
        }
        Ok(())
    }

    fn max_squeeze(&self) -> f64 {
        if self.wide {
            10.0
        } else {
            2.0
        }
    }

    pub fn probes(&self) -> impl Iterator<Item = Result<CovMatrix>> + '_ {
        (0..self.count).map(move |i| random_energy_constrained_cm(self, i))
    }
}

fn random_symplectic(n: usize, squeezes: &[f64], angles: &[f64], mixing: &[f64], pair: Option<f64>) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    if let Some(d) = pair {
        for i in (0..n.saturating_sub(1)).step_by(2) {
            let bs = beam_splitter(n, i, i + 1, std::f64::consts::FRAC_PI_4);
            let sq = squeezer(n, i, d) * squeezer(n, i + 1, 1.0 / d);
            s = &bs * sq * bs.transpose() * s;
        }
    }
    for k in 0..n {
        s = squeezer(n, k, squeezes[k]) * rotation(n, k, angles[k]) * s;
    }
    for (idx, k) in (0..n.saturating_sub(1)).enumerate() {
        s = beam_splitter(n, k, k + 1, mixing[idx]) * s;
    }
    for k in 0..n {
        s = rotation(n, k, angles[n + k]) * s;
    }
    s
}

/// `γ = S·diag(ν)·Sᵀ` with a random symplectic `S` (rotations, beam
/// splitters, squeezes in `[1, d_max]`) and `ν_k = 1 + s·u_k`, where `s` is
/// solved so that `Tr γ = 4nĒ`. If the squeezes alone exceed the energy
/// budget their logarithms are halved until they fit. Deterministic in
/// `(seed, index)`.
pub fn random_energy_constrained_cm(ensemble: &ProbeEnsemble, index: usize) -> Result<CovMatrix> {
    ensemble.validate()?;
    let n = ensemble.n;
    let mut rng = ChaCha8Rng::seed_from_u64(ensemble.seed);
    rng.set_stream(index as u64);
    let dmax = ensemble.max_squeeze();
    let mut log_sq: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=dmax.ln())).collect();
    let angles: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let mixing: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
    let mut log_pair = match ensemble.kind {
        ProbeKind::CorrelatedTwoMode if n >= 2 => Some(rng.gen_range(0.0..=dmax.ln())),
        _ => None,
    };
    let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let budget = 4.0 * n as f64 * ensemble.e_bar;
    for _ in 0..64 {
        let sq: Vec<f64> = log_sq.iter().map(|x| x.exp()).collect();
        let s = random_symplectic(n, &sq, &angles, &mixing, log_pair.map(f64::exp));
        // Tr(S diag(ν) Sᵀ) = Σ_k ν_k c_k with c_k the squared norms of the
        // two columns of S belonging to mode k.
        let c: Vec<f64> = (0..n).map(|k| s.column(2 * k).norm_squared() + s.column(2 * k + 1).norm_squared()).collect();
        let base: f64 = c.iter().sum();
        let slope: f64 = c.iter().zip(&u).map(|(ck, uk)| ck * uk).sum();
        if base <= budget * (1.0 + 1e-15) {
            let scale = if slope > 0.0 { ((budget - base) / slope).max(0.0) } else { 0.0 };
            let mut diag = DMatrix::zeros(2 * n, 2 * n);
            for k in 0..n {
                let nu = 1.0 + scale * u[k];
                diag[(2 * k, 2 * k)] = nu;
                diag[(2 * k + 1, 2 * k + 1)] = nu;
            }
            let gamma = &s * diag * s.transpose();
            return CovMatrix::new(n, gamma);
        }
        log_sq.iter_mut().for_each(|x| *x *= 0.5);
        log_pair = log_pair.map(|x| 0.5 * x);
        if log_sq.iter().all(|&x| x < 1e-12) && log_pair.is_none_or(|x| x < 1e-12) {
            log_sq.iter_mut().for_each(|x| *x = 0.0);
            log_pair = log_pair.map(|_| 0.0);
        }
    }
    Err(Error::Numeric("probe squeezes could not be fitted to the energy budget".into()))
}

/// Brute-force maximum of `T` over diagonal two-mode CMs on the simplex of
/// diagonal entries summing to `4nĒ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGridReport {
    pub step: f64,
    pub points: usize,
    pub max_t: f64,
    /// Fractions of `Tr γ` in the four diagonal entries at the maximum.
    pub argmax: [f64; 4],
    pub violations: usize,
    pub max_at_equal_split: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBoundReport {
    pub ensemble: ProbeEnsemble,
    pub bound: f64,
    pub max_t: f64,
    pub violations: Vec<usize>,
    pub grid: Option<DiagonalGridReport>,
    pub pass: bool,
}

fn trace_bound(n: usize, e_bar: f64) -> f64 {
    2.0 * n as f64 * (4.0 * e_bar * e_bar - 1.0).sqrt()
}

/// Simplex grid over `diag(x₁, y₁, x₂, y₂)` with step `step` in the
/// fraction of `Tr γ`; points with `x_k y_k < 1` are skipped.
pub fn diagonal_grid(e_bar: f64, step: f64) -> Result<DiagonalGridReport> {
    if !(step > 0.0 && step <= 0.25) {
        return Err(Error::InvalidInput(format!("grid step must lie in (0, 1/4], got {step}")));
    }
    let total = 8.0 * e_bar;
    let bound = trace_bound(2, e_bar);
    let m = (1.0 / step).round() as usize;
    let mut points = 0;
    let mut violations = 0;
    let mut max_t = f64::NEG_INFINITY;
    let mut argmax = [0usize; 4];
    for a in 0..=m {
        for b in 0..=(m - a) {
            for c in 0..=(m - a - b) {
                let dd = m - a - b - c;
                let f = [a, b, c, dd].map(|x| x as f64 * total / m as f64);
                let (p1, p2) = (f[0] * f[1], f[2] * f[3]);
                if p1 < 1.0 || p2 < 1.0 {
                    continue;
                }
                points += 1;
                let t = 2.0 * ((p1 - 1.0).sqrt() + (p2 - 1.0).sqrt());
                if t > bound + 1e-9 {
                    violations += 1;
                }
                if t > max_t {
                    max_t = t;
                    argmax = [a, b, c, dd];
                }
            }
        }
    }
    let argmax = argmax.map(|x| x as f64 / m as f64);
    let max_at_equal_split = argmax.iter().all(|&x| (x - 0.25).abs() <= 0.5 * step);
    Ok(DiagonalGridReport { step, points, max_t, argmax, violations, max_at_equal_split })
}

/// `T(γ) ≤ 2n√(4Ē²−1)` over the ensemble, plus the diagonal grid for `n = 2`.
pub fn verify_trace_bound(ensemble: &ProbeEnsemble) -> Result<TraceBoundReport> {
    ensemble.validate()?;
    let bound = trace_bound(ensemble.n, ensemble.e_bar);
    let mut max_t = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (i, probe) in ensemble.probes().enumerate() {
        let t = trace_functional(&probe?)?;
        max_t = max_t.max(t);
        if t > bound + 1e-9 {
            violations.push(i);
        }
    }
    let grid = if ensemble.n == 2 { Some(diagonal_grid(ensemble.e_bar, 0.01)?) } else { None };
    let grid_ok = grid.as_ref().is_none_or(|g| g.violations == 0 && g.max_at_equal_split);
    let pass = violations.is_empty() && grid_ok;
    Ok(TraceBoundReport { ensemble: *ensemble, bound, max_t, violations, grid, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalReport {
    pub ensemble: ProbeEnsemble,
    pub noise: f64,
    pub max_derivative: f64,
    pub thermal_derivative: f64,
    pub violations: Vec<usize>,
    pub pass: bool,
}

/// Derivative of the coherent information from the thermal input towards
/// every probe; all must be `≤ 1e-12`.
pub fn verify_directional(ensemble: &ProbeEnsemble, noise: f64) -> Result<DirectionalReport> {
    ensemble.validate()?;
    if !(ensemble.e_bar > 0.5) {
        return Err(Error::Domain("directional check needs Ē > 1/2".into()));
    }
    let ch = ThermalChannel::new(noise)?;
    let ns = ensemble.e_bar - 0.5;
    let thermal_derivative = directional_derivative(&thermal_cm(ns, ensemble.n)?, ns, &ch)?;
    let mut max_derivative = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (i, probe) in ensemble.probes().enumerate() {
        let dd = directional_derivative(&probe?, ns, &ch)?;
        max_derivative = max_derivative.max(dd);
        if dd > 1e-12 {
            violations.push(i);
        }
    }
    let pass = violations.is_empty();
    Ok(DirectionalReport { ensemble: *ensemble, noise, max_derivative, thermal_derivative, violations, pass })
}

/// Where `N_s` lies relative to the perturbative sign change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `N_s > N_s0`: a positive difference is a failure.
    AboveNs0,
    /// `N_s ≤ N_s0`: positive differences are recorded, not failed.
    BelowNs0,
    /// No sign change exists for this noise (`N ≥ 1/e`).
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositiveDifference {
    pub index: usize,
    pub t: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMaxReport {
    pub ensemble: ProbeEnsemble,
    pub ns: f64,
    pub noise: f64,
    pub ns0: Option<f64>,
    pub regime: Regime,
    pub blend: Vec<f64>,
    /// Largest `I_c(γ(t)) − I_c(γ₀)` (bits) over probes and `t`.
    pub max_difference: f64,
    pub positive: Vec<PositiveDifference>,
    /// Largest derivative along state-space mixtures.
    pub max_mixture_derivative: f64,
    pub mixture_violations: Vec<usize>,
    pub pass: bool,
}

pub const BLEND: [f64; 3] = [0.01, 0.05, 0.1];

/// Compares the coherent information of the thermal input with CM blends
/// `γ(t) = (1−t)γ₀ + tγ_probe` at equal energy, and evaluates the
/// derivative along state mixtures for the same probes.
pub fn verify_local_max(ns: f64, noise: f64, ensemble: &ProbeEnsemble) -> Result<LocalMaxReport> {
    ensemble.validate()?;
    if !(ns > 0.0) {
        return Err(Error::Domain(format!("need N_s > 0, got {ns}")));
    }
    if (ensemble.e_bar - (ns + 0.5)).abs() > 1e-12 * ensemble.e_bar {
        return Err(Error::Constraint { expected: ns + 0.5, got: ensemble.e_bar });
    }
    let ch = ThermalChannel::new(noise)?;
    let base = thermal_cm(ns, ensemble.n)?;
    let ci0 = coherent_information(&base, &ch)?;
    let ns0 = if noise > 0.0 && noise * std::f64::consts::E < 1.0 { Some(find_ns0(noise, PerturbationMode::TwoMode)?.ns0) } else { None };
    let regime = match ns0 {
        Some(root) if ns > root => Regime::AboveNs0,
        Some(_) => Regime::BelowNs0,
        None => Regime::Unclassified,
    };
    let mut max_difference = f64::NEG_INFINITY;
    let mut positive = Vec::new();
    let mut max_mixture_derivative = f64::NEG_INFINITY;
    let mut mixture_violations = Vec::new();
    for (i, probe) in ensemble.probes().enumerate() {
        let probe = probe?;
        for &t in &BLEND {
            let blend = CovMatrix::new(ensemble.n, &base.gamma * (1.0 - t) + &probe.gamma * t)?;
            let diff = coherent_information(&blend, &ch)? - ci0;
            max_difference = max_difference.max(diff);
            if diff > 1e-9 {
                positive.push(PositiveDifference { index: i, t, difference: diff });
            }
        }
        if noise > 0.0 {
            let dd = directional_derivative(&probe, ns, &ch)?;
            max_mixture_derivative = max_mixture_derivative.max(dd);
            if dd > 1e-12 {
                mixture_violations.push(i);
            }
        }
    }
    let pass = match regime {
        Regime::AboveNs0 => positive.is_empty() && mixture_violations.is_empty(),
        _ => mixture_violations.is_empty(),
    };
    Ok(LocalMaxReport {
        ensemble: *ensemble,
        ns,
        noise,
        ns0,
        regime,
        blend: BLEND.to_vec(),
        max_difference,
        positive,
        max_mixture_derivative,
        mixture_violations,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub ns: f64,
    /// Per `ε²`, nats.
    pub delta_ci: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub noise: f64,
    pub mode: PerturbationMode,
    pub rows: Vec<ScanRow>,
    /// Grid intervals `[N_s(i), N_s(i+1)]` containing a sign change.
    pub sign_changes: Vec<(f64, f64)>,
    /// Positive at small `N_s`, a single sign change, negative afterwards.
    pub shape_holds: bool,
    /// `N_s⁴·ΔI_c` at the last grid point and its limit.
    pub tail_scaled: f64,
    pub tail_limit: f64,
}

pub fn scan_delta_ci(noise: f64, ns_grid: &[f64], mode: PerturbationMode) -> Result<ScanReport> {
    if ns_grid.is_empty() {
        return Err(Error::InvalidInput("empty N_s grid".into()));
    }
    let rows = ns_grid
        .iter()
        .map(|&ns| {
            let v = delta_ci(mode, ns, noise)?;
            Ok(ScanRow { ns, delta_ci: v, sign: if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 } })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.delta_ci).collect();
    let changes: Vec<(f64, f64)> = sign_changes(&values).into_iter().map(|i| (rows[i].ns, rows[i + 1].ns)).collect();
    let shape_holds = changes.len() == 1 && rows[0].sign > 0 && rows.last().is_some_and(|r| r.sign < 0);
    let last = rows.last().expect("grid is non-empty");
    let tail_limit = match mode {
        PerturbationMode::Single => SINGLE_MODE_LIMIT,
        PerturbationMode::TwoMode => TWO_MODE_LIMIT,
    };
    Ok(ScanReport { noise, mode, tail_scaled: last.ns.powi(4) * last.delta_ci, tail_limit, rows, sign_changes: changes, shape_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_are_deterministic_and_on_the_energy_shell() {
        let e = ProbeEnsemble::new(2, 1.5, 20, 7).unwrap();
        for i in 0..20 {
            let a = random_energy_constrained_cm(&e, i).unwrap();
            let b = random_energy_constrained_cm(&e, i).unwrap();
            assert_eq!(a, b);
            assert!((a.energy() - 3.0).abs() < 1e-12);
            assert!(crate::symplectic::validate_cm(&a.gamma, a.form()).unwrap().pass);
        }
    }

    #[test]
    fn vacuum_energy_gives_vacuum() {
        let e = ProbeEnsemble::new(2, 0.5, 5, 1).unwrap();
        for p in e.probes() {
            let nus = p.unwrap().symplectic_eigenvalues().unwrap();
            assert!(nus.iter().all(|&nu| (nu - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn infeasible_energy_rejected() {
        assert!(matches!(ProbeEnsemble::new(1, 0.4, 1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn thermal_probe_has_zero_derivative() {
        let r = verify_directional(&ProbeEnsemble::new(1, 2.5, 10, 3).unwrap(), 0.1).unwrap();
        assert!(r.thermal_derivative.abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn grid_maximum_is_equal_split() {
        let g = diagonal_grid(1.5, 0.05).unwrap();
        assert!(g.max_at_equal_split && g.violations == 0, "{g:?}");
        assert!((g.max_t - trace_bound(2, 1.5)).abs() < 1e-12);
    }

    #[test]
    fn scan_changes_sign_once() {
        let grid = crate::roots::log_grid(1e-3, 1e3, 60);
        let r = scan_delta_ci(0.1, &grid, PerturbationMode::TwoMode).unwrap();
        assert!(r.shape_holds, "{:?}", r.sign_changes);
    }
}
