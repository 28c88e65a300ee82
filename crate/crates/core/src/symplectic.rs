//! Covariance-matrix algebra for Gaussian states.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)` and the covariance matrix
//! follows the convention `γ = 2·Tr[(R−η)ρ(R−η)ᵀ] + iJ`, so the vacuum is the
//! identity and a thermal mode with mean photon number `N_s` is
//! `(2N_s + 1)·I₂`. First moments play no role and are not tracked.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, direct_sum, max_abs, sym_fn, symmetrize};

/// Tolerance on `ν ≥ 1` for the physical-state condition.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Tolerance used when matching conjugate eigenvalue pairs of `form⁻¹·γ`.
pub const PAIR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    /// `J_n = ⊕ [[0, −1], [1, 0]]`.
    Standard,
    /// `Ω = J_n ⊕ (−J_n)` on a system+reference pair of `n` modes each.
    FlippedJoint,
}

/// A symplectic form. For [`FormKind::FlippedJoint`] the matrix acts on
/// `2n` modes (`4n` quadratures).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticForm {
    pub n: usize,
    pub kind: FormKind,
}

impl SymplecticForm {
    pub fn standard(n: usize) -> Self {
        Self { n, kind: FormKind::Standard }
    }

    pub fn flipped_joint(n: usize) -> Self {
        Self { n, kind: FormKind::FlippedJoint }
    }

    /// Side length of the form matrix.
    pub fn dim(&self) -> usize {
        match self.kind {
            FormKind::Standard => 2 * self.n,
            FormKind::FlippedJoint => 4 * self.n,
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let jn = standard_form(self.n);
        match self.kind {
            FormKind::Standard => jn,
            FormKind::FlippedJoint => direct_sum(&jn, &(-&jn)),
        }
    }
}

fn standard_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = -1.0;
        j[(2 * k + 1, 2 * k)] = 1.0;
    }
    j
}

fn check_symmetric(gamma: &DMatrix<f64>) -> Result<()> {
    if gamma.nrows() != gamma.ncols() {
        return Err(Error::InvalidInput(format!(
            "covariance matrix must be square, got {}x{}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let tol = 1e-8 * max_abs(gamma).max(1.0);
    let asym = asymmetry(gamma);
    if asym > tol {
        return Err(Error::InvalidInput(format!("matrix is not symmetric (max |γ−γᵀ| = {asym:e})")));
    }
    Ok(())
}

/// Covariance matrix of an `n`-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    pub n: usize,
    pub gamma: DMatrix<f64>,
}

impl CovMatrix {
    /// Builds a covariance matrix, symmetrizing `gamma`. Physicality is not
    /// checked here; see [`validate_cm`].
    pub fn new(n: usize, gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: gamma.nrows() });
        }
        check_symmetric(&gamma)?;
        Ok(Self { n, gamma: symmetrize(&gamma) })
    }

    /// Like [`CovMatrix::new`] but rejects unphysical matrices.
    pub fn new_physical(n: usize, gamma: DMatrix<f64>) -> Result<Self> {
        let cm = Self::new(n, gamma)?;
        let report = validate_cm(&cm.gamma, SymplecticForm::standard(n))?;
        if !report.pass {
            return Err(Error::Domain(format!(
                "unphysical covariance matrix: min symplectic eigenvalue {}",
                report.min_nu
            )));
        }
        Ok(cm)
    }

    pub fn vacuum(n: usize) -> Self {
        Self { n, gamma: DMatrix::identity(2 * n, 2 * n) }
    }

    pub fn form(&self) -> SymplecticForm {
        SymplecticForm::standard(self.n)
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.gamma, self.form())
    }

    pub fn entropy(&self) -> Result<f64> {
        gaussian_entropy(&self.gamma, self.form())
    }

    pub fn energy(&self) -> f64 {
        energy(self)
    }

    pub fn direct_sum(&self, other: &CovMatrix) -> CovMatrix {
        CovMatrix { n: self.n + other.n, gamma: direct_sum(&self.gamma, &other.gamma) }
    }

    /// `S γ Sᵀ` for a symplectic `S`.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<CovMatrix> {
        if s.nrows() != 2 * self.n || s.ncols() != 2 * self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n, got: s.nrows() });
        }
        CovMatrix::new(self.n, s * &self.gamma * s.transpose())
    }
}

/// Covariance matrix of a system (`Q`, first `n` modes) and its reference
/// (`R`, last `n` modes). Entropies use the flipped joint form `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCovMatrix {
    pub n: usize,
    pub gamma: DMatrix<f64>,
}

impl JointCovMatrix {
    pub fn new(n: usize, gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() != 4 * n {
            return Err(Error::DimensionMismatch { expected: 4 * n, got: gamma.nrows() });
        }
        check_symmetric(&gamma)?;
        Ok(Self { n, gamma: symmetrize(&gamma) })
    }

    pub fn form(&self) -> SymplecticForm {
        SymplecticForm::flipped_joint(self.n)
    }

    pub fn system_block(&self) -> DMatrix<f64> {
        self.gamma.view((0, 0), (2 * self.n, 2 * self.n)).into_owned()
    }

    pub fn reference_block(&self) -> DMatrix<f64> {
        let m = 2 * self.n;
        self.gamma.view((m, m), (m, m)).into_owned()
    }

    /// Off-diagonal block `β` (system rows, reference columns).
    pub fn beta(&self) -> DMatrix<f64> {
        let m = 2 * self.n;
        self.gamma.view((0, m), (m, m)).into_owned()
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.gamma, self.form())
    }

    pub fn entropy(&self) -> Result<f64> {
        gaussian_entropy(&self.gamma, self.form())
    }
}

/// Williamson invariants of `gamma` with respect to `form`, descending.
///
/// Computed as the absolute imaginary parts of the eigenvalues of
/// `form⁻¹·γ`, which come in conjugate pairs `±iν`.
pub fn symplectic_eigenvalues(gamma: &DMatrix<f64>, form: SymplecticForm) -> Result<Vec<f64>> {
    let dim = form.dim();
    if gamma.nrows() != dim || gamma.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: gamma.nrows() });
    }
    check_symmetric(gamma)?;
    // form² = −I, so form⁻¹ = −form.
    let a = -form.matrix() * symmetrize(gamma);
    let eig = a.complex_eigenvalues();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("eigen-solver did not converge".into()));
    }
    let mut im: Vec<f64> = eig.iter().map(|z| z.im.abs()).collect();
    im.sort_by(|x, y| y.total_cmp(x));
    let scale = max_abs(gamma).max(1.0);
    let mut out = Vec::with_capacity(dim / 2);
    for pair in im.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).abs() > PAIR_TOL * scale {
            return Err(Error::Numeric(format!("unpaired symplectic eigenvalues {a} and {b}")));
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Outcome of [`validate_cm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub min_nu: f64,
    pub pass: bool,
}

pub fn validate_cm(gamma: &DMatrix<f64>, form: SymplecticForm) -> Result<ValidityReport> {
    let nus = symplectic_eigenvalues(gamma, form)?;
    let min_nu = nus.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ValidityReport { min_nu, pass: min_nu >= 1.0 - PHYSICALITY_TOL })
}

/// `(2N_s + 1)·I_{2n}`.
pub fn thermal_cm(ns: f64, n: usize) -> Result<CovMatrix> {
    if !(ns >= 0.0) || !ns.is_finite() {
        return Err(Error::Domain(format!("mean photon number must be non-negative, got {ns}")));
    }
    Ok(CovMatrix { n, gamma: DMatrix::identity(2 * n, 2 * n) * (2.0 * ns + 1.0) })
}

/// Entropy in nats of a thermal mode with mean photon number `x`.
pub fn g_entropy_nats(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("g is defined for x ≥ 0, got {x}")));
    }
    Ok(g_nats_unchecked(x))
}

pub(crate) fn g_nats_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (x + 1.0) * x.ln_1p() - x * x.ln()
    }
}

/// `g(x) = (x+1)log₂(x+1) − x·log₂x`, the entropy in bits of a thermal mode
/// with mean photon number `x`.
pub fn g_entropy(x: f64) -> Result<f64> {
    g_entropy_nats(x).map(|s| s / LN_2)
}

/// Von Neumann entropy in bits, `Σ g((ν_k − 1)/2)`.
pub fn gaussian_entropy(gamma: &DMatrix<f64>, form: SymplecticForm) -> Result<f64> {
    let nus = symplectic_eigenvalues(gamma, form)?;
    entropy_from_symplectic(&nus)
}

pub(crate) fn entropy_from_symplectic(nus: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &nu in nus {
        if nu < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Domain(format!("symplectic eigenvalue {nu} < 1: unphysical state")));
        }
        s += g_nats_unchecked(((nu - 1.0) * 0.5).max(0.0));
    }
    Ok(s / LN_2)
}

/// Schmidt purification `[[γ, β], [βᵀ, γ]]` with
/// `β = J_n·sqrt(−(J_n⁻¹γ)² − I)`.
///
/// The square root is the principal one. `−(J⁻¹γ)² − I` is similar to the
/// symmetric matrix `AᵀA − I` with `A = γ^{1/2} J⁻¹ γ^{1/2}`, whose spectrum
/// `ν_k² − 1` is non-negative for a valid state.
pub fn purify(cm: &CovMatrix) -> Result<JointCovMatrix> {
    let report = validate_cm(&cm.gamma, cm.form())?;
    if !report.pass {
        return Err(Error::Domain(format!(
            "cannot purify: min symplectic eigenvalue {} < 1",
            report.min_nu
        )));
    }
    let n = cm.n;
    let m = 2 * n;
    let j = standard_form(n);
    let j_inv = -&j;
    let gamma = &cm.gamma;
    let root = sym_fn(gamma, |x| x.max(0.0).sqrt());
    let root_inv = sym_fn(gamma, |x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt());
    let a = &root * &j_inv * &root;
    let k = symmetrize(&(a.transpose() * &a)) - DMatrix::identity(m, m);
    let scale = max_abs(&k).max(1.0);
    let lowest = k.symmetric_eigenvalues().min();
    if lowest < -1e-9 * scale {
        return Err(Error::Domain(format!("negative eigenvalue {lowest} under the purification root")));
    }
    let sqrt_k = sym_fn(&k, |x| x.max(0.0).sqrt());
    let sqrt_m = &root_inv * sqrt_k * &root;
    let beta = &j * sqrt_m;

    let mut g = DMatrix::zeros(2 * m, 2 * m);
    g.view_mut((0, 0), (m, m)).copy_from(gamma);
    g.view_mut((m, m), (m, m)).copy_from(gamma);
    g.view_mut((0, m), (m, m)).copy_from(&beta);
    g.view_mut((m, 0), (m, m)).copy_from(&beta.transpose());
    JointCovMatrix::new(n, g)
}

/// `T(γ) = Tr sqrt(−(J⁻¹γ)² − I) = 2·Σ_k sqrt(ν_k² − 1)`.
pub fn trace_functional(cm: &CovMatrix) -> Result<f64> {
    let nus = cm.symplectic_eigenvalues()?;
    Ok(2.0 * nus.iter().map(|&nu| (nu * nu - 1.0).max(0.0).sqrt()).sum::<f64>())
}

/// Mean energy `Tr γ / 4` in units of `ħω`.
pub fn energy(cm: &CovMatrix) -> f64 {
    cm.gamma.trace() / 4.0
}

/// Single-mode squeezer `diag(s, 1/s)` embedded on mode `k` of `n`.
pub fn squeezer(n: usize, k: usize, s: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n, 2 * n);
    m[(2 * k, 2 * k)] = s;
    m[(2 * k + 1, 2 * k + 1)] = 1.0 / s;
    m
}

/// Phase rotation by `theta` on mode `k` of `n`.
pub fn rotation(n: usize, k: usize, theta: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n, 2 * n);
    let (s, c) = theta.sin_cos();
    m[(2 * k, 2 * k)] = c;
    m[(2 * k, 2 * k + 1)] = -s;
    m[(2 * k + 1, 2 * k)] = s;
    m[(2 * k + 1, 2 * k + 1)] = c;
    m
}

/// Real beam splitter with mixing angle `theta` between modes `i` and `j`.
pub fn beam_splitter(n: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n, 2 * n);
    let (s, c) = theta.sin_cos();
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        m[(a, a)] = c;
        m[(a, b)] = s;
        m[(b, a)] = -s;
        m[(b, b)] = c;
    }
    m
}

/// `max |S·form·Sᵀ − form|`.
pub fn symplectic_defect(s: &DMatrix<f64>, form: SymplecticForm) -> f64 {
    let j = form.matrix();
    max_abs(&(s * &j * s.transpose() - j))
}
