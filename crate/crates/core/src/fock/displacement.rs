use nalgebra::DMatrix;
use num_complex::Complex64;

/// `ln k!` for `k < n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n.max(1));
    out.push(0.0);
    for k in 1..n {
        out.push(out[k - 1] + (k as f64).ln());
    }
    out
}

/// Truncated displacement operator `⟨k|D(α)|m⟩` for `k, m < d`.
///
/// For `k ≥ m` the element is `√(m!/k!)·α^{k−m}·e^{−|α|²/2}·L_m^{(k−m)}(|α|²)`;
/// the `k < m` half follows from `⟨k|D(α)|m⟩ = conj⟨m|D(−α)|k⟩`. Each
/// diagonal band shares one Laguerre recurrence.
pub fn displacement_matrix(alpha: Complex64, d: usize) -> DMatrix<Complex64> {
    let lf = ln_factorials(d);
    displacement_with(alpha, d, &lf)
}

pub(crate) fn displacement_with(alpha: Complex64, d: usize, lf: &[f64]) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(d, d);
    let x = alpha.norm_sqr();
    if x == 0.0 {
        out.fill_diagonal(Complex64::new(1.0, 0.0));
        return out;
    }
    let ln_r = 0.5 * x.ln();
    let phase = alpha / alpha.norm();
    let mut lag = vec![0.0; d];
    for delta in 0..d {
        let a = delta as f64;
        let len = d - delta;
        lag[0] = 1.0;
        if len > 1 {
            lag[1] = 1.0 + a - x;
        }
        for n in 1..len.saturating_sub(1) {
            let nf = n as f64;
            lag[n + 1] = ((2.0 * nf + 1.0 + a - x) * lag[n] - (nf + a) * lag[n - 1]) / (nf + 1.0);
        }
        let ph = phase.powu(delta as u32);
        for m in 0..len {
            let k = m + delta;
            let mag = (0.5 * (lf[m] - lf[k]) + a * ln_r - 0.5 * x).exp() * lag[m];
            out[(k, m)] = ph * mag;
            if delta > 0 {
                // ⟨m|D(α)|k⟩ = conj(⟨k|D(−α)|m⟩) = (−1)^Δ conj(⟨k|D(α)|m⟩).
                let sign = if delta % 2 == 0 { 1.0 } else { -1.0 };
                out[(m, k)] = (ph * mag).conj() * sign;
            }
        }
    }
    out
}

/// Largest deviation of `D(α)D(−α)` from the identity on the leading
/// `d/2` levels, where truncation effects are controlled.
pub fn displacement_leakage(alpha: Complex64, d: usize) -> f64 {
    let prod = displacement_matrix(alpha, d) * displacement_matrix(-alpha, d);
    let w = d / 2;
    let mut worst: f64 = 0.0;
    for i in 0..w {
        for j in 0..w {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_overlap_and_identity() {
        let a = Complex64::new(0.4, -0.3);
        let d = displacement_matrix(a, 10);
        assert!((d[(0, 0)].re - (-a.norm_sqr() / 2.0).exp()).abs() < 1e-15);
        assert_eq!(displacement_matrix(Complex64::new(0.0, 0.0), 5), DMatrix::identity(5, 5));
    }

    #[test]
    fn coherent_column_matches_poisson_amplitudes() {
        let a = Complex64::new(0.8, 0.5);
        let d = displacement_matrix(a, 30);
        let mut fact = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = (-a.norm_sqr() / 2.0).exp() * a.powu(k as u32) / fact.sqrt();
            assert!((d[(k, 0)] - expected).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn inverse_within_window() {
        for &a in &[Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.7), Complex64::new(-0.6, -0.6)] {
            assert!(displacement_leakage(a, 40) < 1e-8);
        }
    }
}
