//! Sign change of the perturbative coherent-information difference and the
//! critical noise below which the asymptotic capacity formula is certified.

use std::f64::consts::E;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::single::delta_ci_single;
use super::two_mode::delta_ci_two_mode;
use crate::channel::{asymptotic_capacity, mutual_information, ThermalChannel};
use crate::error::{Error, Result};
use crate::roots::{bisect, linear_grid, log_grid, sign_changes};
use crate::symplectic::thermal_cm;

/// Qualifier attached to every certification.
pub const CAVEAT: &str = "certified only up to the lowest nonzero power of the inverse input energy: \
higher-order perturbations are assumed not to destroy the local maximality of the thermal input";

/// Which quartic perturbation decides the sign change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    Single,
    #[default]
    TwoMode,
}

/// `ΔI_c` per `ε²` (nats) for the chosen perturbation.
pub fn delta_ci(mode: PerturbationMode, ns: f64, noise: f64) -> Result<f64> {
    Ok(match mode {
        PerturbationMode::Single => delta_ci_single(ns, noise)?.delta_ci,
        PerturbationMode::TwoMode => delta_ci_two_mode(ns, noise)?.delta_ci,
    })
}

pub const NS0_GRID: (f64, f64, usize) = (1e-3, 1e3, 200);

/// Location of the first sign change of `ΔI_c(N_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ns0 {
    pub noise: f64,
    pub mode: PerturbationMode,
    pub ns0: f64,
    pub sign_changes: usize,
    /// `ΔI_c > 0` at every grid point below the root.
    pub positive_below: bool,
    /// `ΔI_c < 0` at every grid point above the root.
    pub negative_above: bool,
    pub warnings: Vec<String>,
}

/// Smallest root of `ΔI_c(N_s)` on a 200-point log grid over
/// `[10⁻³, 10³]`, refined by bisection.
pub fn find_ns0(noise: f64, mode: PerturbationMode) -> Result<Ns0> {
    if !(noise > 0.0 && noise * E < 1.0) {
        return Err(Error::Domain(format!("need 0 < N < 1/e, got {noise}")));
    }
    let (lo, hi, count) = NS0_GRID;
    let grid = log_grid(lo, hi, count);
    let values = grid.iter().map(|&x| delta_ci(mode, x, noise)).collect::<Result<Vec<_>>>()?;
    let changes = sign_changes(&values);
    let Some(&first) = changes.first() else {
        return Err(Error::NoRoot(format!(
            "ΔI_c has no sign change on [{lo}, {hi}] at N = {noise} (ends: {:e}, {:e})",
            values[0],
            values[count - 1]
        )));
    };
    let ns0 = bisect(|x| delta_ci(mode, x, noise), grid[first], grid[first + 1], 1e-13)?;
    let mut warnings = Vec::new();
    if changes.len() > 1 {
        warnings.push(format!(
            "{} sign changes on the scan grid; the smallest root was taken",
            changes.len()
        ));
    }
    let positive_below = values[..=first].iter().all(|&v| v > 0.0);
    let negative_above = values[first + 1..].iter().all(|&v| v < 0.0);
    if !positive_below || !negative_above {
        warnings.push("ΔI_c is not positive below and negative above the root on the whole grid".into());
    }
    Ok(Ns0 { noise, mode, ns0, sign_changes: changes.len(), positive_below, negative_above, warnings })
}

/// `I(ρ(N_s0(N)), N) + log₂(eN)` in bits, together with `N_s0`.
pub fn nc_residual(noise: f64, mode: PerturbationMode) -> Result<(f64, Ns0)> {
    let root = find_ns0(noise, mode)?;
    let mi = mutual_information(&thermal_cm(root.ns0, 1)?, &ThermalChannel::new(noise)?)?;
    Ok((mi + (E * noise).log2(), root))
}

/// Solution of `I(ρ(N_s0(N)), N) = −log₂(eN)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcSolution {
    pub nc: f64,
    pub mode: PerturbationMode,
    pub ns0: f64,
    pub mutual_information: f64,
    pub capacity: f64,
    pub residual: f64,
    /// Scan points where no sign change of `ΔI_c` was found.
    pub skipped: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Scans `N` over `(0.01, 1/e)`, skipping points where `N_s0` does not
/// exist on its grid, and bisects the first sign change of the residual.
pub fn solve_nc(mode: PerturbationMode) -> Result<NcSolution> {
    let grid = linear_grid(0.01, 1.0 / E - 1e-3, 36);
    let mut skipped = Vec::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for &n in &grid {
        match nc_residual(n, mode) {
            Ok((f, _)) => points.push((n, f)),
            Err(Error::NoRoot(_)) => skipped.push(n),
            Err(e) => return Err(e),
        }
    }
    let bracket = points.windows(2).find(|w| w[0].1.signum() != w[1].1.signum());
    let Some(w) = bracket else {
        return Err(Error::NoRoot("the N_c residual does not change sign on (0.01, 1/e)".into()));
    };
    let nc = bisect(|n| nc_residual(n, mode).map(|r| r.0), w[0].0, w[1].0, 1e-12)?;
    let (residual, root) = nc_residual(nc, mode)?;
    let capacity = asymptotic_capacity(nc)?;
    let mut warnings = root.warnings.clone();
    if !skipped.is_empty() {
        warnings.push(format!("N_s0 not found for {} scan points below N = {:.4}", skipped.len(), points[0].0));
    }
    Ok(NcSolution {
        nc,
        mode,
        ns0: root.ns0,
        mutual_information: capacity + residual,
        capacity,
        residual,
        skipped,
        warnings,
    })
}

/// [`solve_nc`] for the two-mode perturbation, computed once per process.
pub fn cached_nc() -> Result<NcSolution> {
    static NC: OnceLock<Result<NcSolution>> = OnceLock::new();
    NC.get_or_init(|| solve_nc(PerturbationMode::TwoMode)).clone()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationEvidence {
    pub nc: f64,
    pub ns0: Option<f64>,
    pub mutual_information: Option<f64>,
    pub caveat: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub noise: f64,
    pub capacity: f64,
    pub certified: bool,
    pub evidence: CertificationEvidence,
}

/// `Q = max{0, −log₂(eN)}`, certified when `N ≤ N_c` or when the formula
/// gives the trivial bound 0.
pub fn certify_capacity(noise: f64) -> Result<Certification> {
    if !(noise > 0.0) {
        return Err(Error::Domain(format!("certification needs N > 0, got {noise}")));
    }
    let capacity = asymptotic_capacity(noise)?;
    let nc = cached_nc()?.nc;
    let (ns0, mi) = match nc_residual(noise, PerturbationMode::TwoMode) {
        Ok((f, root)) => (Some(root.ns0), Some(f - (E * noise).log2())),
        Err(Error::NoRoot(_) | Error::Domain(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(Certification {
        noise,
        capacity,
        certified: capacity == 0.0 || noise <= nc,
        evidence: CertificationEvidence { nc, ns0, mutual_information: mi, caveat: CAVEAT.to_string() },
    })
}
