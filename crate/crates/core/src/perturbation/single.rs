//! Single-mode quartic perturbation `ε|μ|⁴` of a thermal input.

use serde::{Deserialize, Serialize};

use super::moments::Poly2;
use super::DeltaCiReport;
use crate::channel::joint_symplectic_closed_form;
use crate::error::{Error, Result};

/// A truncated non-negative series with the size of its neglected tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

pub(crate) fn require_positive(ns: f64) -> Result<()> {
    if !(ns > 0.0) || !ns.is_finite() {
        return Err(Error::Domain(format!("the expansion is singular unless N_s > 0, got {ns}")));
    }
    Ok(())
}

pub(crate) fn require_noise(noise: f64) -> Result<()> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::Domain(format!("noise must be non-negative, got {noise}")));
    }
    Ok(())
}

/// `λ_k = (1 − v)v^k` with `v = N_s/(N_s + 1)`.
pub fn thermal_weight(ns: f64, k: usize) -> f64 {
    if ns == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let v = ns / (ns + 1.0);
    ((1.0 - v).ln() + k as f64 * v.ln()).exp()
}

/// `λ_k[2 − 4k/N_s + k(k−1)/N_s²]`, the eigenvalue correction of the input
/// in the form used throughout the expansion. The exact second derivative
/// of `λ_k` in `N_s` carries an extra factor `1/(N_s+1)²`
/// (see [`second_derivative_weight`]).
pub fn phi_k(ns: f64, k: usize) -> Result<f64> {
    require_positive(ns)?;
    let kf = k as f64;
    Ok(thermal_weight(ns, k) * (2.0 - 4.0 * kf / ns + kf * (kf - 1.0) / (ns * ns)))
}

/// `(∂λ_k/∂N_s)/λ_k = (k − N_s)/(N_s(N_s+1))`.
pub fn first_derivative_weight(ns: f64, k: usize) -> f64 {
    (k as f64 - ns) / (ns * (ns + 1.0))
}

/// `(∂²λ_k/∂N_s²)/λ_k = [2 − 4k/N_s + k(k−1)/N_s²]/(N_s+1)²`.
pub fn second_derivative_weight(ns: f64, k: usize) -> f64 {
    let kf = k as f64;
    (2.0 - 4.0 * kf / ns + kf * (kf - 1.0) / (ns * ns)) / ((ns + 1.0) * (ns + 1.0))
}

fn second_derivative_poly_k(ns: f64) -> Poly2 {
    let k = Poly2::k();
    let p = Poly2::constant(2.0) - k.scale(4.0 / ns) + (k * (k - Poly2::constant(1.0))).scale(1.0 / (ns * ns));
    p.scale(1.0 / ((ns + 1.0) * (ns + 1.0)))
}

/// Entropy shift of the input per `ε²` (nats), `−½Σ_k φ_k²/λ_k` with the
/// exact derivative, summed until the remaining tail is below `1e-12` of the
/// partial sum.
pub fn input_entropy_shift(ns: f64) -> Result<SeriesValue> {
    require_positive(ns)?;
    let p = second_derivative_poly_k(ns);
    let exact = (p * p).expect(ns, 0.0);
    let mut partial = 0.0;
    let v = ns / (ns + 1.0);
    let mut lam = 1.0 - v;
    const MAX_TERMS: usize = 50_000_000;
    for k in 0..MAX_TERMS {
        let w = second_derivative_weight(ns, k);
        partial += lam * w * w;
        lam *= v;
        let tail = (exact - partial).max(0.0);
        if k > 2 && tail <= 1e-12 * partial {
            return Ok(SeriesValue { value: -0.5 * partial, tail_bound: 0.5 * tail, terms: k + 1 });
        }
    }
    Err(Error::NotConverged { bound: 0.5 * (exact - partial), tol: 1e-12 * partial })
}

/// Closed form of [`input_entropy_shift`], `−½[2/(N_s(N_s+1))]²`.
pub fn input_entropy_shift_closed(ns: f64) -> Result<f64> {
    require_positive(ns)?;
    Ok(-0.5 * (2.0 / (ns * (ns + 1.0))).powi(2))
}

/// Output entropy shift per `ε²` (nats), `−½[2/(N′(N′+1))]²` with
/// `N′ = N_s + N`.
pub fn output_entropy_shift_single(ns: f64, noise: f64) -> Result<f64> {
    require_noise(noise)?;
    let np = ns + noise;
    if !(np > 0.0) {
        return Err(Error::Domain("output is singular at N_s + N = 0".into()));
    }
    Ok(-0.5 * (2.0 / (np * (np + 1.0))).powi(2))
}

/// Parameters of the joint eigenbasis: geometric means of the two normal
/// modes and `(cosh r, sinh r)` of the diagonalizing squeeze.
#[derive(Debug, Clone, Copy)]
pub(crate) struct JointParams {
    pub na: f64,
    pub nb: f64,
    pub c: f64,
    pub s: f64,
}

pub(crate) fn joint_params(ns: f64, noise: f64) -> JointParams {
    let (nu_a, nu_b) = joint_symplectic_closed_form(ns, noise);
    let tanh2r = 2.0 * (ns * (ns + 1.0)).sqrt() / (2.0 * ns + noise + 1.0);
    let r = 0.5 * tanh2r.atanh();
    JointParams { na: 0.5 * (nu_a - 1.0), nb: (0.5 * (nu_b - 1.0)).max(0.0), c: r.cosh(), s: r.sinh() }
}

/// Diagonal of the reference photon number `b†b` in the joint eigenbasis,
/// `m·cosh²r + (k+1)·sinh²r`, with `k` counting the larger normal mode.
pub(crate) fn reference_number_poly(p: &JointParams) -> Poly2 {
    Poly2::m().scale(p.c * p.c) + (Poly2::k() + Poly2::constant(1.0)).scale(p.s * p.s)
}

/// Diagonal of `b†²b²` in the joint eigenbasis.
fn reference_pair_poly(p: &JointParams) -> Poly2 {
    let (c2, s2) = (p.c * p.c, p.s * p.s);
    let one = Poly2::constant(1.0);
    let (k, m) = (Poly2::k(), Poly2::m());
    (m * (m - one)).scale(c2 * c2) + ((k + one) * (k + one.scale(2.0))).scale(s2 * s2) + (m * (k + one)).scale(4.0 * s2 * c2)
}

/// `Φ′_km/λ_km` as a polynomial in `(k, m)`.
fn exchange_weight_poly(ns: f64, p: &JointParams) -> Poly2 {
    let n1 = reference_number_poly(p);
    let n2 = reference_pair_poly(p);
    (Poly2::constant(2.0) - n1.scale(4.0 / ns) + n2.scale(1.0 / (ns * ns))).scale(1.0 / ((ns + 1.0) * (ns + 1.0)))
}

/// Eigenvalue correction of the joint reference/output state in the
/// eigenbasis `|k, m⟩` of the unperturbed joint state,
/// `λ_km(1−v_s)²[2 − 4n₁/N_s + n₂/N_s²]`, where `n₁`, `n₂` are the diagonal
/// elements of `b†b` and `b†²b²` on the reference mode.
pub fn phi_prime_km(ns: f64, noise: f64, k: usize, m: usize) -> Result<f64> {
    require_positive(ns)?;
    require_noise(noise)?;
    let p = joint_params(ns, noise);
    let w = exchange_weight_poly(ns, &p).eval(k as f64, m as f64);
    Ok(joint_weight(&p, k, m) * w)
}

/// `λ_km = (1−v_A)v_A^k (1−v_B)v_B^m`.
pub(crate) fn joint_weight(p: &JointParams, k: usize, m: usize) -> f64 {
    let geo = |n: f64, j: usize| {
        if n == 0.0 {
            if j == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-(n + 1.0).ln() + j as f64 * (n / (n + 1.0)).ln()).exp()
        }
    };
    geo(p.na, k) * geo(p.nb, m)
}

/// Exchange entropy shift per `ε²` (nats), `−½Σ_km Φ′_km²/λ_km`, from the
/// exact geometric moments of the summand.
pub fn exchange_entropy_shift_single(ns: f64, noise: f64) -> Result<f64> {
    require_positive(ns)?;
    require_noise(noise)?;
    let p = joint_params(ns, noise);
    let w = exchange_weight_poly(ns, &p);
    Ok(-0.5 * (w * w).expect(p.na, p.nb))
}

/// [`exchange_entropy_shift_single`] by explicit double summation over a
/// growing box of `(k, m)`, stopping once the neglected tail is below
/// `rel_tol` of the partial sum.
pub fn exchange_entropy_shift_single_series(ns: f64, noise: f64, rel_tol: f64) -> Result<SeriesValue> {
    require_positive(ns)?;
    require_noise(noise)?;
    let p = joint_params(ns, noise);
    let w = exchange_weight_poly(ns, &p);
    let exact = (w * w).expect(p.na, p.nb);
    let mut size = 16usize;
    loop {
        let mut partial = 0.0;
        for k in 0..size {
            for m in 0..size {
                let x = w.eval(k as f64, m as f64);
                partial += joint_weight(&p, k, m) * x * x;
            }
        }
        let tail = (exact - partial).max(0.0);
        if tail <= rel_tol * partial {
            return Ok(SeriesValue { value: -0.5 * partial, tail_bound: 0.5 * tail, terms: size * size });
        }
        if size >= 8192 {
            return Err(Error::NotConverged { bound: 0.5 * tail, tol: rel_tol * partial });
        }
        size *= 2;
    }
}

/// Coherent-information change per `ε²` (nats) for the single-mode
/// perturbation.
pub fn delta_ci_single(ns: f64, noise: f64) -> Result<DeltaCiReport> {
    let output_shift = output_entropy_shift_single(ns, noise)?;
    let exchange_shift = exchange_entropy_shift_single(ns, noise)?;
    Ok(DeltaCiReport::new(ns, noise, output_shift, exchange_shift, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_zero_term() {
        let ns: f64 = 0.7;
        let v = ns / (ns + 1.0);
        assert!((phi_k(ns, 0).unwrap() - 2.0 * (1.0 - v)).abs() < 1e-15);
        assert!(phi_k(0.0, 0).is_err());
    }

    #[test]
    fn phi_has_null_trace_and_mean() {
        for &ns in &[0.3, 1.0, 4.0] {
            let (mut s0, mut s1) = (0.0, 0.0);
            for k in 0..3000 {
                let f = phi_k(ns, k).unwrap();
                s0 += f;
                s1 += k as f64 * f;
            }
            assert!(s0.abs() < 1e-12 && s1.abs() < 1e-11, "{ns}: {s0} {s1}");
        }
    }

    #[test]
    fn input_shift_series_matches_closed_form() {
        for &ns in &[0.05, 0.5, 2.0, 30.0] {
            let s = input_entropy_shift(ns).unwrap();
            let c = input_entropy_shift_closed(ns).unwrap();
            assert!((s.value - c).abs() <= 1e-10 * c.abs(), "{ns}: {} vs {c}", s.value);
            assert!(s.value < 0.0);
        }
    }

    #[test]
    fn output_shift_examples() {
        assert!((output_entropy_shift_single(0.9, 0.1).unwrap() + 0.5).abs() < 1e-14);
        let np: f64 = 1e3;
        let x = output_entropy_shift_single(np - 0.1, 0.1).unwrap();
        assert!((x * np.powi(4) + 2.0).abs() < 1e-2);
    }

    #[test]
    fn exchange_series_matches_moments() {
        for &(ns, n) in &[(0.05, 0.1), (0.5, 0.1), (2.0, 0.1), (3.0, 0.3)] {
            let a = exchange_entropy_shift_single(ns, n).unwrap();
            let b = exchange_entropy_shift_single_series(ns, n, 1e-13).unwrap();
            assert!((a - b.value).abs() <= 1e-10 * a.abs(), "{ns},{n}: {a} vs {}", b.value);
        }
    }

    #[test]
    fn phi_prime_moments_vanish() {
        let (ns, n) = (2.0, 0.1);
        let (mut s0, mut sk, mut sm) = (0.0, 0.0, 0.0);
        for k in 0..250 {
            for m in 0..250 {
                let f = phi_prime_km(ns, n, k, m).unwrap();
                s0 += f;
                sk += k as f64 * f;
                sm += m as f64 * f;
            }
        }
        assert!(s0.abs() < 1e-12 && sk.abs() < 1e-11 && sm.abs() < 1e-11, "{s0} {sk} {sm}");
    }
}
