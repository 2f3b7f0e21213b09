//! Spectral diagnostics: covariance alignment with a graph Fourier basis,
//! spectral gaps, the recovery error bound and subspace coherence.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Axis;
use crate::io::format_number;
use crate::linalg;
use crate::solvers::Loss;
use crate::spectral::EigenBasis;

/// Sample covariance.
///
/// `Rows` gives the `p × p` feature covariance `ỸỸᵀ/n`, each feature centred by
/// its mean over samples; `Columns` mirrors this with `ỸᵀỸ/p`.
pub fn covariance(y: &DMatrix<f64>, axis: Axis) -> Result<DMatrix<f64>> {
    match axis {
        Axis::Rows => {
            let n = y.ncols();
            if n < 2 {
                return Err(Error::DegenerateInput(
                    "row covariance needs at least two samples".into(),
                ));
            }
            let mut c = y.clone();
            for mut row in c.row_iter_mut() {
                let mean = row.mean();
                row.add_scalar_mut(-mean);
            }
            Ok(&c * c.transpose() / n as f64)
        }
        Axis::Columns => Ok(covariance(&y.transpose(), Axis::Rows)
            .map_err(|_| Error::DegenerateInput("column covariance needs at least two features".into()))?),
    }
}

#[derive(Debug, Clone)]
pub struct AlignmentReport {
    /// `Γ = QᵀCQ`
    pub gamma: DMatrix<f64>,
    /// `s = ‖diag Γ‖₂ / ‖Γ‖_F`
    pub alignment_order: f64,
    /// Share of diagonal energy in the first `k` frequencies.
    pub rank_k_alignment: f64,
    pub k: usize,
}

impl AlignmentReport {
    /// `20·log10|Γ|`, floored at −300 dB for exact zeros.
    pub fn gamma_db(&self) -> DMatrix<f64> {
        self.gamma.map(|v| (20.0 * v.abs().log10()).max(-300.0))
    }

    pub fn to_text(&self) -> String {
        format!(
            "alignment_order: {}\nrank_k_alignment: {}\nk: {}\n",
            format_number(self.alignment_order),
            format_number(self.rank_k_alignment),
            self.k
        )
    }
}

/// Alignment of a covariance with a full graph Fourier basis.
pub fn alignment_report(basis: &EigenBasis, c: &DMatrix<f64>, k: usize) -> Result<AlignmentReport> {
    let n = basis.dim();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}×{}, basis has {n} vertices",
            c.nrows(),
            c.ncols()
        )));
    }
    if basis.len() != n {
        return Err(Error::Parameter("alignment needs the full eigenbasis".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k = {k} outside 1..={n}")));
    }
    let q = basis.eigenvectors();
    let gamma = q.transpose() * c * q;
    let total = gamma.norm();
    if total == 0.0 {
        return Err(Error::DegenerateInput("covariance is zero".into()));
    }
    let diag_sq: Vec<f64> = (0..n).map(|i| gamma[(i, i)].powi(2)).collect();
    let diag_total: f64 = diag_sq.iter().sum();
    let alignment_order = diag_total.sqrt() / total;
    let rank_k_alignment = if diag_total > 0.0 {
        diag_sq[..k].iter().sum::<f64>() / diag_total
    } else {
        0.0
    };
    Ok(AlignmentReport {
        gamma,
        alignment_order,
        rank_k_alignment,
        k,
    })
}

/// Eigenvalues at or below this are treated as zero when forming gap ratios.
const ZERO_EIGENVALUE: f64 = 1e-10;

/// `λ_k / λ_{k+1}` with 1-based eigenvalue indices, i.e.
/// `eigenvalues[k−1] / eigenvalues[k]`.
pub fn spectral_gap(eigenvalues: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= eigenvalues.len() {
        return Err(Error::Parameter(format!(
            "k = {k} outside 1..{} for {} eigenvalues",
            eigenvalues.len(),
            eigenvalues.len()
        )));
    }
    let (lo, hi) = (eigenvalues[k - 1], eigenvalues[k]);
    if hi <= ZERO_EIGENVALUE {
        return Err(Error::UndefinedGap(format!("λ_{} = {hi:e} is zero", k + 1)));
    }
    Ok((lo.max(0.0) / hi).clamp(0.0, 1.0))
}

/// Regularization weights `γ/λ_{k+1}` for the row and column graphs.
pub fn bound_gammas(
    row_basis: &EigenBasis,
    col_basis: &EigenBasis,
    k_r: usize,
    k_c: usize,
    gamma: f64,
) -> Result<(f64, f64)> {
    let next = |b: &EigenBasis, k: usize| -> Result<f64> {
        spectral_gap(b.eigenvalues(), k)?;
        Ok(b.eigenvalues()[k])
    };
    Ok((gamma / next(row_basis, k_r)?, gamma / next(col_basis, k_c)?))
}

/// Both sides of the recovery error bound for a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// `φ(X − Y) + γc‖X Q̄‖² + γr‖P̄ᵀX‖²`
    pub lhs: f64,
    /// The same with `γ` in place of `γc` and `γr`, as it arises in the proof.
    pub lhs_proof: f64,
    /// `φ(E) + γ‖Y*‖²(λ_kc/λ_kc+1 + λ_kr/λ_kr+1)`
    pub rhs: f64,
    /// `lhs ≤ rhs·(1 + 1e−3)`
    pub holds: bool,
    pub gamma_r: f64,
    pub gamma_c: f64,
    pub gap_r: f64,
    pub gap_c: f64,
}

/// Evaluates the bound for `Y = Y* + E` and a solution `X*` obtained with
/// `γc = γ/λ_{kc+1}`, `γr = γ/λ_{kr+1}`.
#[allow(clippy::too_many_arguments)]
pub fn error_bound_check(
    y_star: &DMatrix<f64>,
    noise: &DMatrix<f64>,
    x_star: &DMatrix<f64>,
    row_basis: &EigenBasis,
    col_basis: &EigenBasis,
    k_r: usize,
    k_c: usize,
    gamma: f64,
    loss: Loss,
) -> Result<BoundCheck> {
    let (p, n) = y_star.shape();
    if noise.shape() != (p, n) || x_star.shape() != (p, n) {
        return Err(Error::DimensionMismatch(
            "Y*, E and X* must share a shape".into(),
        ));
    }
    if row_basis.dim() != p || col_basis.dim() != n || row_basis.len() != p || col_basis.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "bases must be full {p}- and {n}-vertex eigenbases"
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Parameter(format!("gamma = {gamma} must be positive")));
    }
    let gap_r = spectral_gap(row_basis.eigenvalues(), k_r)?;
    let gap_c = spectral_gap(col_basis.eigenvalues(), k_c)?;
    let (gamma_r, gamma_c) = bound_gammas(row_basis, col_basis, k_r, k_c, gamma)?;

    let y = y_star + noise;
    let fidelity = loss.value(&(x_star - y));
    let col_high = (x_star * col_basis.high(k_c)).norm_squared();
    let row_high = (row_basis.high(k_r).transpose() * x_star).norm_squared();
    let lhs = fidelity + gamma_c * col_high + gamma_r * row_high;
    let lhs_proof = fidelity + gamma * (col_high + row_high);
    let rhs = loss.value(noise) + gamma * y_star.norm_squared() * (gap_c + gap_r);
    Ok(BoundCheck {
        lhs,
        lhs_proof,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-3),
        gamma_r,
        gamma_c,
        gap_r,
        gap_c,
    })
}

#[derive(Debug, Clone)]
pub struct Coherence {
    /// `ΣVᵀQ`, `r × n`
    pub sigma_vt_q: DMatrix<f64>,
    /// `ΣUᵀP`, `r × p`
    pub sigma_ut_p: DMatrix<f64>,
    /// Singular values, descending.
    pub singular_values: DVector<f64>,
}

/// SVD `X = UΣVᵀ` projected onto the graph Fourier bases.
pub fn subspace_coherence(x: &DMatrix<f64>, row_basis: &EigenBasis, col_basis: &EigenBasis) -> Result<Coherence> {
    let (p, n) = x.shape();
    if row_basis.dim() != p || col_basis.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "X is {p}×{n}, bases have {} and {} vertices",
            row_basis.dim(),
            col_basis.dim()
        )));
    }
    if x.amax() == 0.0 {
        return Err(Error::DegenerateInput("X is zero".into()));
    }
    let (mut u, sigma, mut vt) = sorted_svd(x)?;
    let signs = linalg::fix_column_signs(&mut u, 1e-12);
    for (mut row, s) in vt.row_iter_mut().zip(signs) {
        row *= s;
    }
    let scale = |m: DMatrix<f64>| {
        let mut m = m;
        for (mut row, s) in m.row_iter_mut().zip(sigma.iter()) {
            row *= *s;
        }
        m
    };
    Ok(Coherence {
        sigma_vt_q: scale(&vt * col_basis.eigenvectors()),
        sigma_ut_p: scale(u.transpose() * row_basis.eigenvectors()),
        singular_values: sigma,
    })
}

/// Thin SVD with singular values in descending order. Each column of `U` has
/// its first entry above 1e-12 in magnitude made positive, with `Vᵀ` flipped to match.
pub(crate) fn sorted_svd(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let m = faer::Mat::<f64>::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)]);
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let (fu, fv, fs) = (svd.U(), svd.V(), svd.S().column_vector());
    let r = fs.nrows();
    let mut u = DMatrix::from_fn(x.nrows(), r, |i, j| fu[(i, j)]);
    let mut vt = DMatrix::from_fn(r, x.ncols(), |i, j| fv[(j, i)]);
    let sigma = DVector::from_fn(r, |i, _| fs[i]);
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("non-finite singular value".into()));
    }
    for j in 0..r {
        if u.column(j).iter().find(|v| v.abs() > 1e-12).is_some_and(|v| *v < 0.0) {
            u.column_mut(j).neg_mut();
            vt.row_mut(j).neg_mut();
        }
    }
    Ok((u, sigma, vt))
}

/// Singular values of `x`, descending.
pub fn singular_values(x: &DMatrix<f64>) -> DVector<f64> {
    let m = faer::Mat::<f64>::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)]);
    let mut s = m
        .singular_values()
        .unwrap_or_else(|_| x.singular_values().iter().copied().collect());
    s.sort_by(|a, b| b.total_cmp(a));
    DVector::from_vec(s)
}

/// Fraction of `‖M‖²_F` carried by the first `k` columns.
pub fn low_frequency_mass(m: &DMatrix<f64>, k: usize) -> f64 {
    let total = m.norm_squared();
    if total == 0.0 {
        return 0.0;
    }
    let k = k.min(m.ncols());
    m.columns(0, k).norm_squared() / total
}

/// `γc Σ λ_ci (QᵀXᵀXQ)_ii + γr Σ λ_rj (PᵀXXᵀP)_jj`, using the uncentred second
/// moments of `X`. Equals `γc tr(X Lc Xᵀ) + γr tr(Xᵀ Lr X)`.
pub fn weighted_alignment_objective(
    x: &DMatrix<f64>,
    row_basis: &EigenBasis,
    col_basis: &EigenBasis,
    gamma_r: f64,
    gamma_c: f64,
) -> Result<f64> {
    let (p, n) = x.shape();
    if row_basis.dim() != p || col_basis.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "X is {p}×{n}, bases have {} and {} vertices",
            row_basis.dim(),
            col_basis.dim()
        )));
    }
    let xq = x * col_basis.eigenvectors();
    let col: f64 = xq
        .column_iter()
        .zip(col_basis.eigenvalues())
        .map(|(c, l)| l * c.norm_squared())
        .sum();
    let ptx = row_basis.eigenvectors().tr_mul(x);
    let row: f64 = ptx
        .row_iter()
        .zip(row_basis.eigenvalues())
        .map(|(r, l)| l * r.norm_squared())
        .sum();
    Ok(gamma_c * col + gamma_r * row)
}

/// Summary of a recovered matrix against its graphs.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub singular_values: DVector<f64>,
    /// `(λ_kc/λ_kc+1, λ_kr/λ_kr+1)`, `None` where the gap is undefined.
    pub spectral_gaps: (Option<f64>, Option<f64>),
    pub k_r: usize,
    pub k_c: usize,
    pub bound: Option<BoundCheck>,
    pub coherence: Coherence,
    /// Share of `‖ΣVᵀQ‖²` in the first `k_c` columns.
    pub column_concentration: f64,
    /// Share of `‖ΣUᵀP‖²` in the first `k_r` columns.
    pub row_concentration: f64,
}

pub fn diagnostics_report(
    x: &DMatrix<f64>,
    row_basis: &EigenBasis,
    col_basis: &EigenBasis,
    k_r: usize,
    k_c: usize,
    bound: Option<BoundCheck>,
) -> Result<DiagnosticsReport> {
    let coherence = subspace_coherence(x, row_basis, col_basis)?;
    let gap = |b: &EigenBasis, k| match spectral_gap(b.eigenvalues(), k) {
        Ok(g) => Ok(Some(g)),
        Err(Error::UndefinedGap(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(DiagnosticsReport {
        singular_values: coherence.singular_values.clone(),
        spectral_gaps: (gap(col_basis, k_c)?, gap(row_basis, k_r)?),
        k_r,
        k_c,
        bound,
        column_concentration: low_frequency_mass(&coherence.sigma_vt_q, k_c),
        row_concentration: low_frequency_mass(&coherence.sigma_ut_p, k_r),
        coherence,
    })
}

impl DiagnosticsReport {
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), format_number);
        let mut s = String::new();
        let _ = writeln!(s, "k_r: {}", self.k_r);
        let _ = writeln!(s, "k_c: {}", self.k_c);
        let _ = writeln!(s, "spectral_gap_c: {}", opt(self.spectral_gaps.0));
        let _ = writeln!(s, "spectral_gap_r: {}", opt(self.spectral_gaps.1));
        let _ = writeln!(s, "column_concentration: {}", format_number(self.column_concentration));
        let _ = writeln!(s, "row_concentration: {}", format_number(self.row_concentration));
        let top: Vec<String> = self.singular_values.iter().take(20).map(|v| format_number(*v)).collect();
        let _ = writeln!(s, "leading_singular_values: {}", top.join(" "));
        if let Some(b) = &self.bound {
            let _ = writeln!(s, "bound_lhs: {}", format_number(b.lhs));
            let _ = writeln!(s, "bound_lhs_proof: {}", format_number(b.lhs_proof));
            let _ = writeln!(s, "bound_rhs: {}", format_number(b.rhs));
            let _ = writeln!(s, "bound_holds: {}", b.holds);
        }
        s
    }

    /// `index,sigma`
    pub fn singular_values_csv(&self) -> String {
        let mut s = String::from("index,sigma\n");
        for (i, v) in self.singular_values.iter().enumerate() {
            let _ = writeln!(s, "{i},{}", format_number(*v));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{knn_graph, laplacian, DataMatrix, KnnParams, LaplacianKind, SparseGraph};
    use crate::spectral::{dirichlet_energy, eigendecompose};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_basis(n: usize, seed: u64) -> (EigenBasis, crate::LaplacianMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DataMatrix::new(DMatrix::from_fn(3, n, |_, _| rng.gen::<f64>())).unwrap();
        let l = laplacian(&knn_graph(&data, Axis::Columns, &KnnParams::new(4)).unwrap(), LaplacianKind::Normalized);
        (eigendecompose(&l, None).unwrap(), l)
    }

    #[test]
    fn covariance_cases() {
        let y = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]);
        let c = covariance(&y, Axis::Rows).unwrap();
        assert_eq!(c, DMatrix::from_element(2, 2, 1.0));
        let same = DMatrix::from_fn(3, 4, |i, _| i as f64);
        assert_eq!(covariance(&same, Axis::Rows).unwrap().amax(), 0.0);
        assert!(covariance(&DMatrix::zeros(3, 1), Axis::Rows).is_err());
        assert!(covariance(&DMatrix::zeros(1, 3), Axis::Columns).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = DMatrix::from_fn(6, 9, |_, _| rng.gen::<f64>());
        for axis in [Axis::Rows, Axis::Columns] {
            let c = covariance(&r, axis).unwrap();
            assert!(c.symmetric_eigen().eigenvalues.min() >= -1e-10);
        }
    }

    #[test]
    fn alignment_of_diagonalizable_covariances() {
        let (b, _) = random_basis(12, 2);
        let eye = DMatrix::identity(12, 12);
        let r = alignment_report(&b, &eye, 3).unwrap();
        assert_abs_diff_eq!(r.alignment_order, 1.0, epsilon = 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_fn(12, |i, _| 1.0 / (1.0 + i as f64)));
        let c = b.eigenvectors() * d * b.eigenvectors().transpose();
        assert_abs_diff_eq!(alignment_report(&b, &c, 2).unwrap().alignment_order, 1.0, epsilon = 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(12, 12, |_, _| rng.gen::<f64>());
        let dense = &a * a.transpose();
        assert!(alignment_report(&b, &dense, 2).unwrap().alignment_order < 1.0);
        let mut prev = 0.0;
        for k in 1..=12 {
            let s = alignment_report(&b, &dense, k).unwrap().rank_k_alignment;
            assert!(s >= prev);
            prev = s;
        }
        assert_abs_diff_eq!(prev, 1.0, epsilon = 1e-12);
        assert!(alignment_report(&b, &dense, 13).is_err());
        assert!(matches!(
            alignment_report(&b, &DMatrix::zeros(12, 12), 1),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn spectral_gap_cases() {
        let path = SparseGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let b = eigendecompose(&laplacian(&path, LaplacianKind::Unnormalized), None).unwrap();
        let lam = |k: f64| 2.0 - 2.0 * (k * std::f64::consts::PI / 4.0).cos();
        assert_abs_diff_eq!(spectral_gap(b.eigenvalues(), 2).unwrap(), lam(1.0) / lam(2.0), epsilon = 1e-12);
        assert!(spectral_gap(b.eigenvalues(), 1).unwrap() < 1e-12);

        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
        let cliques = SparseGraph::from_edges(8, edges).unwrap();
        let b = eigendecompose(&laplacian(&cliques, LaplacianKind::Normalized), None).unwrap();
        assert!(spectral_gap(b.eigenvalues(), 2).unwrap() < 1e-12);
        assert!(matches!(spectral_gap(b.eigenvalues(), 1), Err(Error::UndefinedGap(_))));
        assert!(spectral_gap(b.eigenvalues(), 8).is_err());
    }

    #[test]
    fn weighted_alignment_equals_dirichlet_energies() {
        let (q, lc) = random_basis(10, 4);
        let (p, lr) = random_basis(7, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = DMatrix::from_fn(7, 10, |_, _| rng.gen::<f64>() - 0.5);
        let w = weighted_alignment_objective(&x, &p, &q, 0.3, 1.7).unwrap();
        let direct = 1.7 * dirichlet_energy(&lc, &x.transpose()).unwrap() + 0.3 * dirichlet_energy(&lr, &x).unwrap();
        assert!((w - direct).abs() <= 1e-8 * direct);
        assert_eq!(weighted_alignment_objective(&DMatrix::zeros(7, 10), &p, &q, 1.0, 1.0).unwrap(), 0.0);
        let outer = p.eigenvectors().column(2) * q.eigenvectors().column(5).transpose();
        let v = weighted_alignment_objective(&outer, &p, &q, 2.0, 3.0).unwrap();
        assert_abs_diff_eq!(v, 2.0 * p.eigenvalues()[2] + 3.0 * q.eigenvalues()[5], epsilon = 1e-10);
    }

    #[test]
    fn coherence_of_rank_one_outer_product() {
        let (q, _) = random_basis(10, 7);
        let (p, _) = random_basis(8, 8);
        let x = p.eigenvectors().column(0) * q.eigenvectors().column(0).transpose() * 2.5;
        let c = subspace_coherence(&x, &p, &q).unwrap();
        assert_abs_diff_eq!(c.singular_values[0], 2.5, epsilon = 1e-10);
        assert_abs_diff_eq!(c.sigma_ut_p[(0, 0)].abs(), 2.5, epsilon = 1e-10);
        let rest = c.sigma_ut_p.norm_squared() - c.sigma_ut_p[(0, 0)].powi(2);
        assert!(rest < 1e-16);
        assert_abs_diff_eq!(c.sigma_vt_q.norm(), c.singular_values.norm(), epsilon = 1e-10);
        assert!(subspace_coherence(&DMatrix::zeros(8, 10), &p, &q).is_err());
    }

    #[test]
    fn bound_trivial_cases() {
        let (q, _) = random_basis(12, 9);
        let (p, _) = random_basis(10, 10);
        let c = DMatrix::from_fn(2, 2, |i, j| (1 + i + 2 * j) as f64);
        let y_star = p.low(2) * c * q.low(2).transpose();
        let e = DMatrix::zeros(10, 12);
        let check = error_bound_check(&y_star, &e, &y_star, &p, &q, 2, 2, 1.0, Loss::L1).unwrap();
        assert!(check.lhs.abs() < 1e-10);
        assert!(check.holds);
        // X = 0 is not a solver output; only evaluated
        let zero = error_bound_check(&y_star, &e, &DMatrix::zeros(10, 12), &p, &q, 2, 2, 1.0, Loss::L1).unwrap();
        assert_abs_diff_eq!(zero.lhs, Loss::L1.value(&y_star), epsilon = 1e-9);
        assert!(error_bound_check(&y_star, &e, &y_star, &p, &q, 0, 2, 1.0, Loss::L1).is_err());
    }
}
