//! Two-mode perturbation `ε|μ₁μ₂|²` of a product thermal input.
//!
//! The perturbation is the mixed derivative `∂ρ/∂N₁ ⊗ ∂ρ/∂N₂`. On the
//! reference side each factor is `(b†b − N_s)/(N_s(N_s+1))`; in the joint
//! eigenbasis this has the diagonal part `(n₁ − N_s)/(N_s(N_s+1))` and the
//! pair terms `κ(a†b† + ab)` with `κ = cosh r·sinh r/(N_s(N_s+1))`. The
//! unperturbed joint spectrum of two copies is degenerate in blocks of fixed
//! `(K, M) = (k₁+k₂, m₁+m₂)`; only the part of the operator that stays
//! inside a block enters the second-order shift.

use nalgebra::DMatrix;

use super::moments::Poly2;
use super::single::{joint_params, reference_number_poly, require_noise, require_positive, JointParams, SeriesValue};
use super::DeltaCiReport;
use crate::error::{Error, Result};

fn diagonal_poly(ns: f64, p: &JointParams) -> Poly2 {
    (reference_number_poly(p) - Poly2::constant(ns)).scale(1.0 / (ns * (ns + 1.0)))
}

fn kappa(ns: f64, p: &JointParams) -> f64 {
    p.c * p.s / (ns * (ns + 1.0))
}

/// Output entropy shift per `ε²` (nats), `−1/(2N′²(N′+1)²)`.
pub fn output_entropy_shift_two_mode(ns: f64, noise: f64) -> Result<f64> {
    require_noise(noise)?;
    let np = ns + noise;
    if !(np > 0.0) {
        return Err(Error::Domain("output is singular at N_s + N = 0".into()));
    }
    Ok(-1.0 / (2.0 * np * np * (np + 1.0) * (np + 1.0)))
}

/// Exchange entropy shift per `ε²` (nats) from the closed-form block sums:
/// `−½(A² + 2κ⁴·E[(k+1)(m+1)]·E[km])` with `A = E[X²]` the single-copy
/// second moment of the diagonal part.
pub fn exchange_entropy_shift_two_mode(ns: f64, noise: f64) -> Result<f64> {
    require_positive(ns)?;
    require_noise(noise)?;
    let p = joint_params(ns, noise);
    let x = diagonal_poly(ns, &p);
    let a = (x * x).expect(p.na, p.nb);
    let kap = kappa(ns, &p);
    let pair = (p.na + 1.0) * (p.nb + 1.0) * p.na * p.nb;
    Ok(-0.5 * (a * a + 2.0 * kap.powi(4) * pair))
}

/// In-block operator `X_B` of the degenerate block `(K, M)` over the basis
/// `(k₁, m₁)` with `k₂ = K − k₁`, `m₂ = M − m₁` (row index `k₁(M+1) + m₁`).
pub fn block_operator(ns: f64, noise: f64, big_k: usize, big_m: usize) -> Result<DMatrix<f64>> {
    require_positive(ns)?;
    let p = joint_params(ns, noise);
    Ok(block_operator_with(&diagonal_poly(ns, &p), kappa(ns, &p), big_k, big_m))
}

/// Diagonal entry at `(k₁, m₁)` and the pair-hopping amplitude to
/// `(k₁+1, m₁+1)` within block `(K, M)`.
fn block_entries(x: &Poly2, kap: f64, big_k: usize, big_m: usize, k1: usize, m1: usize) -> (f64, f64) {
    let (k2, m2) = (big_k - k1, big_m - m1);
    let diag = x.eval(k1 as f64, m1 as f64) * x.eval(k2 as f64, m2 as f64);
    // a₁†b₁†a₂b₂ moves one excitation pair from copy 2 to copy 1.
    let hop = if k2 >= 1 && m2 >= 1 { kap * kap * (((k1 + 1) * (m1 + 1) * k2 * m2) as f64).sqrt() } else { 0.0 };
    (diag, hop)
}

fn block_operator_with(x: &Poly2, kap: f64, big_k: usize, big_m: usize) -> DMatrix<f64> {
    let cols = big_m + 1;
    let dim = (big_k + 1) * cols;
    let idx = |k1: usize, m1: usize| k1 * cols + m1;
    let mut op = DMatrix::zeros(dim, dim);
    for k1 in 0..=big_k {
        for m1 in 0..=big_m {
            let (diag, hop) = block_entries(x, kap, big_k, big_m, k1, m1);
            let i = idx(k1, m1);
            op[(i, i)] = diag;
            if hop != 0.0 {
                let j = idx(k1 + 1, m1 + 1);
                op[(j, i)] = hop;
                op[(i, j)] = hop;
            }
        }
    }
    op
}

/// `Tr(X_B²)` from the block entries without materializing the block.
fn block_trace_sq(x: &Poly2, kap: f64, big_k: usize, big_m: usize) -> f64 {
    let mut total = 0.0;
    for k1 in 0..=big_k {
        for m1 in 0..=big_m {
            let (diag, hop) = block_entries(x, kap, big_k, big_m, k1, m1);
            total += diag * diag + 2.0 * hop * hop;
        }
    }
    total
}

/// [`exchange_entropy_shift_two_mode`] by explicit summation over the
/// degenerate blocks with `K, M < size`, where each block contributes
/// `λ_{KM}·Tr(X_B²)`; the box grows until the tail is below `rel_tol`.
pub fn exchange_entropy_shift_two_mode_blocks(ns: f64, noise: f64, rel_tol: f64) -> Result<SeriesValue> {
    require_positive(ns)?;
    require_noise(noise)?;
    let p = joint_params(ns, noise);
    let x = diagonal_poly(ns, &p);
    let kap = kappa(ns, &p);
    let exact = -2.0 * exchange_entropy_shift_two_mode(ns, noise)?;
    let (va, vb) = (p.na / (p.na + 1.0), p.nb / (p.nb + 1.0));
    let norm = ((1.0 - va) * (1.0 - vb)).powi(2);
    let mut size = 8usize;
    loop {
        let mut partial = 0.0;
        for big_k in 0..size {
            for big_m in 0..size {
                let lam = norm * va.powi(big_k as i32) * vb.powi(big_m as i32);
                if lam == 0.0 {
                    continue;
                }
                partial += lam * block_trace_sq(&x, kap, big_k, big_m);
            }
        }
        let tail = (exact - partial).max(0.0);
        if tail <= rel_tol * partial {
            return Ok(SeriesValue { value: -0.5 * partial, tail_bound: 0.5 * tail, terms: size * size });
        }
        if size >= 256 {
            return Err(Error::NotConverged { bound: 0.5 * tail, tol: rel_tol * partial });
        }
        size *= 2;
    }
}

/// Coherent-information change per `ε²` (nats) for the two-mode
/// perturbation.
pub fn delta_ci_two_mode(ns: f64, noise: f64) -> Result<DeltaCiReport> {
    let output_shift = output_entropy_shift_two_mode(ns, noise)?;
    let exchange_shift = exchange_entropy_shift_two_mode(ns, noise)?;
    Ok(DeltaCiReport::new(ns, noise, output_shift, exchange_shift, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::single::output_entropy_shift_single;

    #[test]
    fn output_examples() {
        assert!((output_entropy_shift_two_mode(0.9, 0.1).unwrap() + 0.125).abs() < 1e-14);
        for &np in &[0.3, 1.0, 7.0] {
            let x = 2.0 / (np * (np + 1.0));
            let single = output_entropy_shift_single(np, 0.0).unwrap();
            assert!((single + 0.5 * x * x).abs() < 1e-12);
            let two = output_entropy_shift_two_mode(np, 0.0).unwrap();
            assert!((two - single / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn blocks_match_closed_form() {
        for &(ns, n) in &[(0.1, 0.1), (1.5, 0.1), (3.0, 0.2)] {
            let a = exchange_entropy_shift_two_mode(ns, n).unwrap();
            let b = exchange_entropy_shift_two_mode_blocks(ns, n, 1e-12).unwrap();
            assert!((a - b.value).abs() <= 1e-9 * a.abs(), "{ns},{n}: {a} vs {}", b.value);
        }
    }

    #[test]
    fn block_operator_is_symmetric() {
        let op = block_operator(1.5, 0.1, 3, 2).unwrap();
        assert_eq!(op.nrows(), 12);
        assert!((&op - op.transpose()).abs().max() == 0.0);
        let p = joint_params(1.5, 0.1);
        let direct = block_trace_sq(&diagonal_poly(1.5, &p), kappa(1.5, &p), 3, 2);
        assert!((op.norm_squared() - direct).abs() < 1e-14 * direct);
    }
}
