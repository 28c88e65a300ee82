use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::{entropy_nats, FockDensity, Repr, Sector};
use super::displacement::{displacement_with, ln_factorials};
use super::quadrature::QuadratureSpec;
use crate::error::{Error, Result};

/// Phase-averaged second moments of the displacement,
/// `T_Δ(m, m′) = Σ_nodes w·⟨m+Δ|D(α)|m⟩·conj⟨m′+Δ|D(α)|m′⟩`.
///
/// The channel maps `|m⟩⟨m′|` to `Σ_Δ T_Δ(m, m′)|m+Δ⟩⟨m′+Δ|`; cross terms
/// between different `Δ` average out over the phase of `α`.
#[derive(Debug, Clone)]
pub struct TransferTables {
    pub d: usize,
    pub noise: f64,
    tables: Vec<DMatrix<f64>>,
    /// `|Σ w − 1|` of the quadrature rule.
    pub weight_error: f64,
    /// Largest imaginary part discarded from the tables.
    pub max_imaginary: f64,
}

impl TransferTables {
    pub fn new(noise: f64, d: usize, q: &QuadratureSpec) -> Result<Self> {
        q.validate()?;
        if !(noise >= 0.0) || !noise.is_finite() {
            return Err(Error::Domain(format!("noise must be non-negative, got {noise}")));
        }
        if d < 2 {
            return Err(Error::InvalidInput(format!("truncation dimension must be at least 2, got {d}")));
        }
        let mut re: Vec<DMatrix<f64>> = (0..2 * d - 1).map(|i| {
            let n = d - (i as isize - (d as isize - 1)).unsigned_abs();
            DMatrix::zeros(n, n)
        }).collect();
        if noise == 0.0 {
            re[d - 1].fill(1.0);
            return Ok(Self { d, noise, tables: re, weight_error: 0.0, max_imaginary: 0.0 });
        }
        let mut im = re.clone();
        let lf = ln_factorials(d);
        let nodes = q.nodes(noise);
        let weight_sum: f64 = nodes.iter().map(|n| n.weight).sum();
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        for node in &nodes {
            let dm = displacement_with(node.alpha, d, &lf);
            for (idx, (t_re, t_im)) in re.iter_mut().zip(im.iter_mut()).enumerate() {
                let delta = idx as isize - (d as isize - 1);
                let m0 = (-delta).max(0) as usize;
                let n = t_re.nrows();
                for i in 0..n {
                    let m = m0 + i;
                    v[i] = dm[((m as isize + delta) as usize, m)];
                }
                let w = node.weight;
                for j in 0..n {
                    let vj = v[j];
                    for i in j..n {
                        let vi = v[i];
                        t_re[(i, j)] += w * (vi.re * vj.re + vi.im * vj.im);
                        t_im[(i, j)] += w * (vi.im * vj.re - vi.re * vj.im);
                    }
                }
            }
        }
        let mut max_imaginary: f64 = 0.0;
        for (t_re, t_im) in re.iter_mut().zip(&im) {
            let n = t_re.nrows();
            for j in 0..n {
                for i in j..n {
                    max_imaginary = max_imaginary.max(t_im[(i, j)].abs());
                    t_re[(j, i)] = t_re[(i, j)];
                }
            }
        }
        Ok(Self { d, noise, tables: re, weight_error: (weight_sum - 1.0).abs(), max_imaginary })
    }

    /// First `m` of the table for `delta`.
    pub fn offset(&self, delta: isize) -> usize {
        (-delta).max(0) as usize
    }

    pub fn table(&self, delta: isize) -> &DMatrix<f64> {
        &self.tables[(delta + self.d as isize - 1) as usize]
    }

    pub fn deltas(&self) -> impl Iterator<Item = isize> {
        let d = self.d as isize;
        -(d - 1)..d
    }

    /// `P(k, m) = T_{k−m}(m, m)`, the channel restricted to diagonals.
    pub fn diagonal_transfer(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(d, d, |k, m| {
            let delta = k as isize - m as isize;
            let i = m - self.offset(delta);
            self.table(delta)[(i, i)]
        })
    }

    fn check_weights(&self) -> Result<()> {
        if self.weight_error > 1e-6 {
            return Err(Error::QuadratureDiverged(self.weight_error));
        }
        Ok(())
    }
}

/// Channel output for a diagonal single-mode input `λ`.
pub(crate) fn output_spectrum(lam: &[f64], t: &TransferTables) -> Vec<f64> {
    let p = t.diagonal_transfer() * nalgebra::DVector::from_column_slice(lam);
    p.iter().copied().collect()
}

/// Output of two independent channels for a diagonal two-mode input
/// `Λ(m₁, m₂)` stored row-major.
pub(crate) fn output_spectrum_two_mode(lam2: &[f64], t: &TransferTables) -> Vec<f64> {
    let d = t.d;
    let p = t.diagonal_transfer();
    let l = DMatrix::from_row_slice(d, d, lam2);
    let out = &p * l * p.transpose();
    (0..d * d).map(|i| out[(i / d, i % d)]).collect()
}

/// Sectors `q − r = Δ` of the joint output/reference state for the
/// purification `Σ √λ_m |m⟩|m⟩` of a diagonal input.
pub(crate) fn joint_sectors(lam: &[f64], t: &TransferTables) -> Vec<Sector> {
    let d = t.d;
    let sl: Vec<f64> = lam.iter().map(|&x| x.max(0.0).sqrt()).collect();
    t.deltas()
        .filter_map(|delta| {
            let tab = t.table(delta);
            if tab.iter().all(|&x| x == 0.0) {
                return None;
            }
            let m0 = t.offset(delta);
            let n = tab.nrows();
            let block = DMatrix::from_fn(n, n, |i, j| sl[m0 + i] * sl[m0 + j] * tab[(i, j)]);
            let basis = (0..n).map(|i| ((m0 + i) as isize + delta) as usize * d + m0 + i).collect();
            Some(Sector { basis, block })
        })
        .collect()
}

/// Calls `f` with every `(Δ₁, Δ₂)` block of the joint state of two copies
/// for a diagonal two-mode input, together with the reference index
/// `r₁·d + r₂` of each row.
pub(crate) fn for_each_two_mode_block(lam2: &[f64], t: &TransferTables, mut f: impl FnMut(DMatrix<f64>, Vec<usize>)) {
    let d = t.d;
    let sl: Vec<f64> = lam2.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let active: Vec<isize> = t.deltas().filter(|&dl| t.table(dl).iter().any(|&x| x != 0.0)).collect();
    for &d1 in &active {
        let (t1, o1) = (t.table(d1), t.offset(d1));
        for &d2 in &active {
            let (t2, o2) = (t.table(d2), t.offset(d2));
            let (n1, n2) = (t1.nrows(), t2.nrows());
            let refs: Vec<usize> = (0..n1 * n2).map(|a| (o1 + a / n2) * d + o2 + a % n2).collect();
            let block = DMatrix::from_fn(n1 * n2, n1 * n2, |a, b| {
                sl[refs[a]] * sl[refs[b]] * t1[(a / n2, b / n2)] * t2[(a % n2, b % n2)]
            });
            f(block, refs);
        }
    }
}

/// Entropy (nats) of the joint state of two copies for a diagonal two-mode
/// input.
pub(crate) fn joint_entropy_two_mode_nats(lam2: &[f64], t: &TransferTables, cutoff: f64) -> f64 {
    let mut total = 0.0;
    for_each_two_mode_block(lam2, t, |block, _| {
        let eigs: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
        total += entropy_nats(&eigs, cutoff, false);
    });
    total
}

/// The thermal-noise channel on a single-mode state.
pub fn apply_thermal_channel(rho: &FockDensity, noise: f64, q: &QuadratureSpec) -> Result<FockDensity> {
    if rho.factors != 1 {
        return Err(Error::InvalidInput("the channel acts on single-mode states".into()));
    }
    if noise == 0.0 {
        return Ok(rho.clone());
    }
    let out = if rho.is_diagonal() {
        let t = TransferTables::new(noise, rho.d, q)?;
        t.check_weights()?;
        FockDensity::from_diagonal(rho.d, 1, output_spectrum(&rho.diagonal(), &t))?
    } else {
        let d = rho.d;
        let m = rho.to_dense();
        let lf = ln_factorials(d);
        let mut acc = DMatrix::zeros(d, d);
        let mut weight_sum = 0.0;
        for node in q.nodes(noise) {
            let dm = displacement_with(node.alpha, d, &lf);
            acc += (&dm * &m * dm.adjoint()) * Complex64::new(node.weight, 0.0);
            weight_sum += node.weight;
        }
        if (weight_sum - 1.0_f64).abs() > 1e-6 {
            return Err(Error::QuadratureDiverged((weight_sum - 1.0_f64).abs()));
        }
        FockDensity::from_dense(d, 1, acc)?
    };
    if out.trace() > rho.trace() + 1e-6 {
        return Err(Error::QuadratureDiverged(out.trace() - rho.trace()));
    }
    Ok(out)
}

/// Joint state of channel output (first factor) and reference (second
/// factor) for the purification of `rho` in its eigenbasis.
pub fn joint_after_channel_fock(rho: &FockDensity, noise: f64, q: &QuadratureSpec) -> Result<FockDensity> {
    if rho.factors != 1 {
        return Err(Error::InvalidInput("the purification route needs a single-mode input".into()));
    }
    let d = rho.d;
    if rho.is_diagonal() {
        let t = TransferTables::new(noise, d, q)?;
        t.check_weights()?;
        return Ok(FockDensity::from_sectors(d, 2, joint_sectors(&rho.diagonal(), &t)));
    }
    let eig = SymmetricEigen::new(rho.to_dense());
    let psi = DMatrix::from_fn(d, d, |qi, i| eig.eigenvectors[(qi, i)] * eig.eigenvalues[i].max(0.0).sqrt());
    let vec_of = |m: &DMatrix<Complex64>| nalgebra::DVector::from_fn(d * d, |idx, _| m[(idx / d, idx % d)]);
    let joint = if noise == 0.0 {
        let v = vec_of(&psi);
        &v * v.adjoint()
    } else {
        let lf = ln_factorials(d);
        let mut acc = DMatrix::zeros(d * d, d * d);
        for node in q.nodes(noise) {
            let v = vec_of(&(displacement_with(node.alpha, d, &lf) * &psi));
            acc += (&v * v.adjoint()) * Complex64::new(node.weight, 0.0);
        }
        acc
    };
    FockDensity::from_dense(d, 2, joint)
}

/// `Tr_R` of a system/reference state.
pub fn partial_trace_reference(joint: &FockDensity) -> Result<FockDensity> {
    if joint.factors != 2 {
        return Err(Error::InvalidInput("partial trace needs a two-factor state".into()));
    }
    let d = joint.d;
    let mut out = DMatrix::zeros(d, d);
    match &joint.repr {
        Repr::Sectors(sectors) => {
            for sec in sectors {
                for (i, &bi) in sec.basis.iter().enumerate() {
                    for (j, &bj) in sec.basis.iter().enumerate() {
                        if bi % d == bj % d {
                            out[(bi / d, bj / d)] += Complex64::new(sec.block[(i, j)], 0.0);
                        }
                    }
                }
            }
        }
        _ => {
            let m = joint.to_dense();
            for q1 in 0..d {
                for q2 in 0..d {
                    out[(q1, q2)] = (0..d).map(|r| m[(q1 * d + r, q2 * d + r)]).sum();
                }
            }
        }
    }
    FockDensity::from_dense(d, 1, out)
}

/// Entropies (bits) entering the coherent information of a Fock-space input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockCiReport {
    pub input_entropy: f64,
    pub output_entropy: f64,
    pub joint_entropy: f64,
    pub coherent_information: f64,
    pub output_deficit: f64,
    pub joint_deficit: f64,
}

pub fn coherent_information_fock(rho: &FockDensity, noise: f64, q: &QuadratureSpec) -> Result<FockCiReport> {
    let input_entropy = super::density::von_neumann_entropy(rho)?;
    let out = apply_thermal_channel(rho, noise, q)?;
    let joint = joint_after_channel_fock(rho, noise, q)?;
    let output_entropy = super::density::von_neumann_entropy(&out)?;
    let joint_entropy = super::density::von_neumann_entropy(&joint)?;
    Ok(FockCiReport {
        input_entropy,
        output_entropy,
        joint_entropy,
        coherent_information: output_entropy - joint_entropy,
        output_deficit: out.deficit,
        joint_deficit: joint.deficit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::density::{number_state, thermal_fock, von_neumann_entropy};

    #[test]
    fn vacuum_calibration() {
        let q = QuadratureSpec::default();
        let out = apply_thermal_channel(&number_state(0, 40).unwrap(), 0.5, &q).unwrap();
        assert!((out.mean_photons() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn tables_are_real() {
        let t = TransferTables::new(0.2, 12, &QuadratureSpec::default()).unwrap();
        assert!(t.max_imaginary < 1e-12, "{}", t.max_imaginary);
        assert!(t.weight_error < 1e-10);
    }

    #[test]
    fn identity_channel_keeps_joint_pure() {
        let q = QuadratureSpec::default();
        let joint = joint_after_channel_fock(&thermal_fock(1.0, 30).unwrap(), 0.0, &q).unwrap();
        assert!(von_neumann_entropy(&joint).unwrap() < 1e-6);
    }

    #[test]
    fn dense_route_matches_sectors() {
        let q = QuadratureSpec::default();
        let rho = thermal_fock(0.6, 10).unwrap();
        let dense = FockDensity::from_dense(10, 1, rho.to_dense()).unwrap();
        let off = FockDensity { repr: Repr::Dense(dense.to_dense()), ..dense };
        let a = joint_after_channel_fock(&rho, 0.1, &q).unwrap();
        let mut m = off.to_dense();
        m[(0, 1)] = Complex64::new(1e-30, 0.0);
        m[(1, 0)] = Complex64::new(1e-30, 0.0);
        let b = joint_after_channel_fock(&FockDensity::from_dense(10, 1, m).unwrap(), 0.1, &q).unwrap();
        let sa = von_neumann_entropy(&a).unwrap();
        let sb = von_neumann_entropy(&b).unwrap();
        assert!((sa - sb).abs() < 1e-9, "{sa} vs {sb}");
    }
}
