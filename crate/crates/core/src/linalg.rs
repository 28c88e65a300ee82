use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest absolute entry of `a - aᵀ`.
pub(crate) fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub(crate) fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Applies `f` to the spectrum of a real symmetric matrix.
pub(crate) fn sym_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let mapped = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&x| f(x)));
    &eig.eigenvectors * DMatrix::from_diagonal(&mapped) * eig.eigenvectors.transpose()
}

/// Eigenvalues of a Hermitian matrix, ascending. Uses the real symmetric
/// solver when the imaginary part is negligible.
pub(crate) fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let imag = a.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    let mut values: Vec<f64> = if imag <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        let re = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        re.symmetric_eigenvalues().iter().copied().collect()
    } else {
        let h = DMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
        h.symmetric_eigenvalues().iter().copied().collect()
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("Hermitian eigenvalue solver returned non-finite values".into()));
    }
    values.sort_by(|x, y| x.total_cmp(y));
    Ok(values)
}
