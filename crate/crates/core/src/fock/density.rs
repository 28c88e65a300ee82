use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;

/// A Hermitian block of a density matrix supported on `basis`, given as flat
/// indices into the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub basis: Vec<usize>,
    pub block: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    Diagonal(Vec<f64>),
    /// Real blocks on disjoint index sets; everything else is zero.
    Sectors(Vec<Sector>),
    Dense(DMatrix<Complex64>),
}

/// Density matrix on `factors` copies of a `d`-level truncated Fock space
/// (`factors = 2` is a system/reference pair or two modes). `deficit` is the
/// probability lost to truncation, `1 − Tr ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    pub d: usize,
    pub factors: usize,
    pub repr: Repr,
    pub deficit: f64,
}

impl FockDensity {
    pub fn from_diagonal(d: usize, factors: usize, diag: Vec<f64>) -> Result<Self> {
        check_len(d, factors, diag.len())?;
        let deficit = 1.0 - diag.iter().sum::<f64>();
        Ok(Self { d, factors, repr: Repr::Diagonal(diag), deficit })
    }

    pub fn from_dense(d: usize, factors: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        check_len(d, factors, rho.nrows())?;
        if rho.nrows() != rho.ncols() {
            return Err(Error::InvalidInput("density matrix must be square".into()));
        }
        let scale = rho.iter().fold(0.0_f64, |a, z| a.max(z.norm())).max(1e-300);
        let herm = (0..rho.nrows())
            .flat_map(|i| (0..rho.ncols()).map(move |j| (i, j)))
            .fold(0.0_f64, |a, (i, j)| a.max((rho[(i, j)] - rho[(j, i)].conj()).norm()));
        if herm > 1e-10 * scale {
            return Err(Error::InvalidInput(format!("density matrix is not Hermitian ({herm:e})")));
        }
        let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let deficit = 1.0 - rho.trace().re;
        Ok(Self { d, factors, repr: Repr::Dense(rho), deficit })
    }

    pub(crate) fn from_sectors(d: usize, factors: usize, sectors: Vec<Sector>) -> Self {
        let trace: f64 = sectors.iter().map(|s| s.block.trace()).sum();
        Self { d, factors, repr: Repr::Sectors(sectors), deficit: 1.0 - trace }
    }

    /// Side length `d^factors`.
    pub fn dim(&self) -> usize {
        self.d.pow(self.factors as u32)
    }

    pub fn trace(&self) -> f64 {
        1.0 - self.deficit
    }

    pub fn diagonal(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Diagonal(v) => v.clone(),
            Repr::Dense(m) => m.diagonal().iter().map(|z| z.re).collect(),
            Repr::Sectors(s) => {
                let mut out = vec![0.0; self.dim()];
                for sec in s {
                    for (i, &b) in sec.basis.iter().enumerate() {
                        out[b] += sec.block[(i, i)];
                    }
                }
                out
            }
        }
    }

    pub fn is_diagonal(&self) -> bool {
        match &self.repr {
            Repr::Diagonal(_) => true,
            Repr::Dense(m) => (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0))),
            Repr::Sectors(s) => s.iter().all(|sec| sec.basis.len() == 1),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        match &self.repr {
            Repr::Diagonal(v) => DMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { v[i] } else { 0.0 }, 0.0)),
            Repr::Dense(m) => m.clone(),
            Repr::Sectors(s) => {
                let mut out = DMatrix::zeros(n, n);
                for sec in s {
                    for (i, &bi) in sec.basis.iter().enumerate() {
                        for (j, &bj) in sec.basis.iter().enumerate() {
                            out[(bi, bj)] = Complex64::new(sec.block[(i, j)], 0.0);
                        }
                    }
                }
                out
            }
        }
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut out = match &self.repr {
            Repr::Diagonal(v) => v.clone(),
            Repr::Dense(m) => hermitian_eigenvalues(m)?,
            Repr::Sectors(s) => {
                let mut all = Vec::with_capacity(self.dim());
                for sec in s {
                    all.extend(sec.block.clone().symmetric_eigenvalues().iter().copied());
                }
                all
            }
        };
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite eigenvalue".into()));
        }
        out.sort_by(|a, b| a.total_cmp(b));
        Ok(out)
    }

    /// `Σ k ρ_kk` for a single-mode state.
    pub fn mean_photons(&self) -> f64 {
        self.diagonal().iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m = self.to_dense();
        let n = m.nrows();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        serde_json::to_value(DensityJson { d: self.d, modes: self.factors, re, im, deficit: Some(self.deficit) })
            .expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let j: DensityJson = serde_json::from_value(value.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let n = j.d.pow(j.modes as u32);
        if j.re.len() != n * n || j.im.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: j.re.len().min(j.im.len()) });
        }
        let m = DMatrix::from_fn(n, n, |r, c| Complex64::new(j.re[r * n + c], j.im[r * n + c]));
        let mut rho = Self::from_dense(j.d, j.modes, m)?;
        if let Some(deficit) = j.deficit {
            rho.deficit = deficit;
        }
        Ok(rho)
    }
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    d: usize,
    modes: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deficit: Option<f64>,
}

fn check_len(d: usize, factors: usize, len: usize) -> Result<()> {
    if d < 2 || !(1..=2).contains(&factors) {
        return Err(Error::InvalidInput(format!("need d ≥ 2 and 1 or 2 factors, got d={d}, factors={factors}")));
    }
    let n = d.pow(factors as u32);
    if len != n {
        return Err(Error::DimensionMismatch { expected: n, got: len });
    }
    Ok(())
}

/// Thermal state `(1−v)Σ_{k<d} v^k|k⟩⟨k|` with `v = N_s/(N_s+1)`; the
/// deficit is `v^d`.
pub fn thermal_fock(ns: f64, d: usize) -> Result<FockDensity> {
    if !(ns >= 0.0) || !ns.is_finite() {
        return Err(Error::Domain(format!("mean photon number must be non-negative, got {ns}")));
    }
    FockDensity::from_diagonal(d, 1, thermal_spectrum(ns, d))
}

pub(crate) fn thermal_spectrum(ns: f64, d: usize) -> Vec<f64> {
    (0..d).map(|k| crate::perturbation::single::thermal_weight(ns, k)).collect()
}

/// Number state `|n⟩⟨n|`.
pub fn number_state(n: usize, d: usize) -> Result<FockDensity> {
    if n >= d {
        return Err(Error::InvalidInput(format!("|{n}⟩ does not fit in dimension {d}")));
    }
    let mut diag = vec![0.0; d];
    diag[n] = 1.0;
    FockDensity::from_diagonal(d, 1, diag)
}

/// `−Σ λ ln λ` over eigenvalues above `cutoff`, optionally after dividing
/// by their sum.
pub(crate) fn entropy_nats(eigs: &[f64], cutoff: f64, renormalize: bool) -> f64 {
    let total: f64 = if renormalize { eigs.iter().filter(|&&x| x > cutoff).sum() } else { 1.0 };
    eigs.iter()
        .filter(|&&x| x > cutoff)
        .map(|&x| {
            let p = x / total;
            -p * p.ln()
        })
        .sum()
}

/// Entropy in bits over eigenvalues above `1e-14`, renormalized to unit
/// trace.
pub fn von_neumann_entropy(rho: &FockDensity) -> Result<f64> {
    von_neumann_entropy_with(rho, true)
}

pub fn von_neumann_entropy_with(rho: &FockDensity, renormalize: bool) -> Result<f64> {
    let eigs = rho.eigenvalues()?;
    Ok(entropy_nats(&eigs, 1e-14, renormalize) / LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::g_entropy;

    #[test]
    fn thermal_examples() {
        let v = thermal_fock(0.0, 8).unwrap();
        assert_eq!(v.diagonal()[0], 1.0);
        assert_eq!(v.deficit, 0.0);
        let t = thermal_fock(1.0, 60).unwrap();
        assert!((t.deficit - 0.5f64.powi(60)).abs() < 1e-15);
        assert!((von_neumann_entropy(&t).unwrap() - g_entropy(1.0).unwrap()).abs() < 1e-6);
        assert!((t.mean_photons() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(von_neumann_entropy(&number_state(3, 5).unwrap()).unwrap(), 0.0);
        let mixed = FockDensity::from_diagonal(2, 1, vec![0.5, 0.5]).unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let mut m = DMatrix::from_element(3, 3, Complex64::new(0.0, 0.0));
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.3, 0.0);
        m[(2, 2)] = Complex64::new(0.2, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.05);
        m[(1, 0)] = Complex64::new(0.1, -0.05);
        let rho = FockDensity::from_dense(3, 1, m).unwrap();
        let back = FockDensity::from_json(&rho.to_json()).unwrap();
        assert_eq!(back.to_dense(), rho.to_dense());
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        m[(0, 1)] = Complex64::new(0.3, 0.0);
        assert!(FockDensity::from_dense(2, 1, m).is_err());
    }
}
