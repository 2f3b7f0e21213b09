//! Graph Fourier analysis: Laplacian eigenbases, the graph Fourier transform,
//! Dirichlet energies and spectral filters (exact and Chebyshev).

use std::fmt;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;
use crate::linalg;

/// Eigenpairs `(Λ, Q)` of a Laplacian, eigenvalues ascending, eigenvectors as
/// orthonormal columns. This is the graph Fourier basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl EigenBasis {
    /// Assembles a basis from precomputed eigenpairs; eigenvalues must be
    /// nondecreasing and match the number of columns.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        if eigenvalues.len() != eigenvectors.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues for {} eigenvectors",
                eigenvalues.len(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Parameter("eigenvalues must be nondecreasing".into()));
        }
        Ok(EigenBasis {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Number of vertices `N`.
    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Number of stored eigenpairs.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// First `k` eigenvectors (low frequencies), e.g. `Q_k`.
    pub fn low(&self, k: usize) -> DMatrix<f64> {
        self.eigenvectors.columns(0, k.min(self.len())).into_owned()
    }

    /// Eigenvectors from index `k` on (high frequencies), e.g. `Q̄_k`.
    pub fn high(&self, k: usize) -> DMatrix<f64> {
        let k = k.min(self.len());
        self.eigenvectors.columns(k, self.len() - k).into_owned()
    }

    /// `Q Λ Qᵀ`
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let scaled = DMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * self.eigenvalues[j]);
        scaled * q.transpose()
    }

    /// Graph Fourier transform `x̂ = Qᵀx`.
    pub fn gft(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_rows(x.len())?;
        Ok(self.eigenvectors.tr_mul(x))
    }

    /// Inverse transform `x = Q x̂`.
    pub fn igft(&self, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a basis of {} eigenpairs",
                coeffs.len(),
                self.len()
            )));
        }
        Ok(&self.eigenvectors * coeffs)
    }

    /// Column-wise transform `X̂ = QᵀX`.
    pub fn gft_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_rows(x.nrows())?;
        Ok(self.eigenvectors.tr_mul(x))
    }

    pub fn igft_matrix(&self, coeffs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if coeffs.nrows() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficient rows for a basis of {} eigenpairs",
                coeffs.nrows(),
                self.len()
            )));
        }
        Ok(&self.eigenvectors * coeffs)
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "signal of length {rows} on a graph with {} vertices",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Eigendecomposition of a Laplacian, all pairs or the `count` smallest.
///
/// Eigenvectors are sign-normalized so that their first nonzero entry is
/// positive. Within a repeated eigenvalue any orthonormal basis may result.
pub fn eigendecompose(l: &LaplacianMatrix, count: Option<usize>) -> Result<EigenBasis> {
    eigendecompose_dense(&l.to_dense(), count)
}

pub fn eigendecompose_dense(m: &DMatrix<f64>, count: Option<usize>) -> Result<EigenBasis> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}×{}",
            n,
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::ContractViolation(format!(
            "matrix is not symmetric (max |L − Lᵀ| = {asym:e})"
        )));
    }
    let count = match count {
        None => n,
        Some(c) if c >= 1 && c <= n => c,
        Some(c) => {
            return Err(Error::Parameter(format!(
                "eigenpair count {c} outside 1..={n}"
            )))
        }
    };
    let dense = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = dense
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    // faer returns eigenvalues in nondecreasing order
    let values = eig.S().column_vector();
    let u = eig.U();

    let mut eigenvalues = Vec::with_capacity(count);
    for i in 0..count {
        let v = values[i];
        if !v.is_finite() {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        if v < -1e-8 * scale {
            return Err(Error::ContractViolation(format!(
                "matrix is not positive semidefinite (eigenvalue {v:e})"
            )));
        }
        eigenvalues.push(v.max(0.0));
    }
    let mut vectors = DMatrix::from_fn(n, count, |r, c| u[(r, c)]);
    linalg::fix_column_signs(&mut vectors, 1e-12);
    Ok(EigenBasis {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, stopping
/// when the Rayleigh quotient changes by less than `tol` relative.
pub fn power_iteration(m: &CsrMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = DVector::from_fn(n, |_, _| rng.gen::<f64>() + 0.5);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = linalg::sparse_matvec(m, &v);
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let done = (next - lambda).abs() <= tol * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

/// Dirichlet energy `tr(Xᵀ L X)`, with graph vertices along the rows of `x`.
pub fn dirichlet_energy(l: &LaplacianMatrix, x: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() != l.size() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, Laplacian is {}×{}",
            x.nrows(),
            l.size(),
            l.size()
        )));
    }
    Ok(x.dot(&l.apply_left(x)))
}

/// Spectral filter families.
///
/// `StepGb` is the penalty `g_b(x) = h_b(x)/h_b(2b − x)` with
/// `h_b(x) = exp(−b/(x − b/2))` for `x > b/2` and 0 otherwise; it is 0 below
/// `b/2` and infinite from `3b/2` on. `ProxFb` is `f_b(x, γ) = 1/(1 + γ g_b(x))`,
/// the spectral response of the proximal operator of `γ·tr(Xᵀ g_b(L) X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterSpec {
    Identity,
    /// `1/(1 + γx)`
    Tikhonov { gamma: f64 },
    StepGb { b: f64 },
    ProxFb { b: f64, gamma: f64 },
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Error::Parameter(format!("filter {what} = {v} is invalid"));
        match *self {
            FilterSpec::Identity => Ok(()),
            FilterSpec::Tikhonov { gamma } if !(gamma.is_finite() && gamma >= 0.0) => {
                Err(bad("gamma", gamma))
            }
            FilterSpec::StepGb { b } | FilterSpec::ProxFb { b, .. } if !(b.is_finite() && b > 0.0) => {
                Err(bad("b", b))
            }
            FilterSpec::ProxFb { gamma, .. } if !(gamma.is_finite() && gamma >= 0.0) => {
                Err(bad("gamma", gamma))
            }
            _ => Ok(()),
        }
    }

    /// Filter value at `x ≥ 0`; `StepGb` returns `+∞` from `3b/2` on.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FilterSpec::Identity => 1.0,
            FilterSpec::Tikhonov { gamma } => 1.0 / (1.0 + gamma * x),
            FilterSpec::StepGb { b } => step_gb(b, x),
            FilterSpec::ProxFb { b, gamma } => prox_fb(b, gamma, x),
        }
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSpec::Identity => write!(f, "identity"),
            FilterSpec::Tikhonov { gamma } => write!(f, "tikhonov(gamma={gamma})"),
            FilterSpec::StepGb { b } => write!(f, "step_gb(b={b})"),
            FilterSpec::ProxFb { b, gamma } => write!(f, "prox_fb(b={b}, gamma={gamma})"),
        }
    }
}

/// `h_b(x) = exp(−b/(x − b/2))` for `x > b/2`, else 0.
pub fn h_b(b: f64, x: f64) -> f64 {
    if x > 0.5 * b {
        (-b / (x - 0.5 * b)).exp()
    } else {
        0.0
    }
}

fn step_gb(b: f64, x: f64) -> f64 {
    let den = h_b(b, 2.0 * b - x);
    if den == 0.0 {
        return f64::INFINITY;
    }
    h_b(b, x) / den
}

fn prox_fb(b: f64, gamma: f64, x: f64) -> f64 {
    // zero penalty: the prox is the identity
    if gamma == 0.0 {
        return 1.0;
    }
    let num = h_b(b, 2.0 * b - x);
    let den = num + gamma * h_b(b, x);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn eval_filter(spec: &FilterSpec, x: f64) -> f64 {
    spec.eval(x)
}

/// Side of the data matrix a graph filter acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `g(L) · X`, graph on the rows.
    Left,
    /// `X · g(L)`, graph on the columns.
    Right,
}

/// `Q g(Λ) Qᵀ X` (left) or `X Q g(Λ) Qᵀ` (right), using a full basis.
pub fn apply_filter_exact(
    basis: &EigenBasis,
    spec: &FilterSpec,
    x: &DMatrix<f64>,
    side: Side,
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let response = filter_response(basis, spec)?;
    apply_response(basis, &response, x, side)
}

pub(crate) fn filter_response(basis: &EigenBasis, spec: &FilterSpec) -> Result<Vec<f64>> {
    basis
        .eigenvalues()
        .iter()
        .map(|&lam| {
            let v = spec.eval(lam);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::FilterMisuse(format!(
                    "{spec} is infinite at eigenvalue {lam}; apply the f_b form instead"
                )))
            }
        })
        .collect()
}

pub(crate) fn apply_response(
    basis: &EigenBasis,
    response: &[f64],
    x: &DMatrix<f64>,
    side: Side,
) -> Result<DMatrix<f64>> {
    if basis.len() != basis.dim() {
        return Err(Error::Parameter(
            "exact filtering needs the full eigenbasis".into(),
        ));
    }
    let q = basis.eigenvectors();
    match side {
        Side::Left => {
            let mut coeffs = basis.gft_matrix(x)?;
            for (mut row, &g) in coeffs.row_iter_mut().zip(response) {
                row *= g;
            }
            Ok(q * coeffs)
        }
        Side::Right => {
            if x.ncols() != basis.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "matrix has {} columns, graph has {} vertices",
                    x.ncols(),
                    basis.dim()
                )));
            }
            let mut coeffs = x * q;
            for (mut col, &g) in coeffs.column_iter_mut().zip(response) {
                col *= g;
            }
            Ok(coeffs * q.transpose())
        }
    }
}

/// Chebyshev expansion of a filter on `[0, λ_max]`, applied through repeated
/// sparse products with the Laplacian.
#[derive(Debug, Clone)]
pub struct ChebyshevFilter {
    coeffs: Vec<f64>,
    lambda_max: f64,
}

impl ChebyshevFilter {
    /// Interpolates `spec` at the `order + 1` Chebyshev nodes of `[0, lambda_max]`.
    pub fn new(spec: &FilterSpec, order: usize, lambda_max: f64) -> Result<Self> {
        spec.validate()?;
        if order < 1 {
            return Err(Error::Parameter("Chebyshev order must be at least 1".into()));
        }
        if !(lambda_max.is_finite() && lambda_max >= 0.0) {
            return Err(Error::Parameter(format!("invalid spectrum bound {lambda_max}")));
        }
        let m = order + 1;
        let half = 0.5 * lambda_max;
        let nodes: Vec<f64> = (0..m)
            .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / m as f64)
            .collect();
        let values: Vec<f64> = nodes
            .iter()
            .map(|t| spec.eval(half * (t.cos() + 1.0)))
            .collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::FilterMisuse(format!(
                "{spec} takes value {v} on [0, {lambda_max}]"
            )));
        }
        let coeffs = (0..=order)
            .map(|k| {
                2.0 / m as f64
                    * nodes
                        .iter()
                        .zip(&values)
                        .map(|(t, v)| v * (k as f64 * t).cos())
                        .sum::<f64>()
            })
            .collect();
        Ok(ChebyshevFilter { coeffs, lambda_max })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluates the polynomial at a scalar, for inspecting the approximation.
    pub fn eval(&self, x: f64) -> f64 {
        if self.lambda_max == 0.0 {
            return chebyshev_sum(&self.coeffs, -1.0);
        }
        chebyshev_sum(&self.coeffs, x / (0.5 * self.lambda_max) - 1.0)
    }

    pub fn apply(&self, l: &LaplacianMatrix, x: &DMatrix<f64>, side: Side) -> Result<DMatrix<f64>> {
        let rows = match side {
            Side::Left => x.nrows(),
            Side::Right => x.ncols(),
        };
        if rows != l.size() {
            return Err(Error::DimensionMismatch(format!(
                "matrix side of length {rows}, Laplacian is {}×{}",
                l.size(),
                l.size()
            )));
        }
        let mul = |m: &DMatrix<f64>| match side {
            Side::Left => l.apply_left(m),
            Side::Right => l.apply_right(m),
        };
        if self.lambda_max == 0.0 {
            // L = 0 on the whole interval: only T_k(−1) terms survive
            return Ok(x * chebyshev_sum(&self.coeffs, -1.0));
        }
        let half = 0.5 * self.lambda_max;
        // shifted operator (L − half·I)/half
        let shifted = |m: &DMatrix<f64>| (mul(m) - m * half) / half;

        let mut prev = x.clone();
        let mut out = x * (0.5 * self.coeffs[0]);
        if self.coeffs.len() == 1 {
            return Ok(out);
        }
        let mut cur = shifted(x);
        out += &cur * self.coeffs[1];
        for &c in &self.coeffs[2..] {
            let next = shifted(&cur) * 2.0 - &prev;
            out += &next * c;
            prev = cur;
            cur = next;
        }
        Ok(out)
    }
}

fn chebyshev_sum(coeffs: &[f64], t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    let mut sum = 0.5 * coeffs[0];
    if coeffs.len() > 1 {
        sum += coeffs[1] * cur;
    }
    for &c in coeffs.iter().skip(2) {
        let next = 2.0 * t * cur - prev;
        sum += c * next;
        prev = cur;
        cur = next;
    }
    sum
}

/// Chebyshev approximation of [`apply_filter_exact`] on `[0, spectral_norm_bound]`.
pub fn apply_filter_chebyshev(
    l: &LaplacianMatrix,
    spec: &FilterSpec,
    order: usize,
    x: &DMatrix<f64>,
    side: Side,
) -> Result<DMatrix<f64>> {
    ChebyshevFilter::new(spec, order, l.spectral_norm_bound())?.apply(l, x, side)
}
