use nalgebra::DMatrix;

use super::check_shapes;
use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;

/// `(I + γr Lr)⁻¹ Y (I + γc Lc)⁻¹` by dense Cholesky solves.
///
/// Each factor is the minimizer of `‖X − Z‖²_F + γ tr(Xᵀ L X)` on one side, so
/// with a single active graph this is the exact minimizer of the `l2`
/// problem. With both graphs active it carries an extra `γrγc Lr X Lc` term
/// relative to that minimizer.
pub fn tikhonov_closed_form(
    y: &DMatrix<f64>,
    lr: &LaplacianMatrix,
    lc: &LaplacianMatrix,
    gamma_r: f64,
    gamma_c: f64,
) -> Result<DMatrix<f64>> {
    check_shapes(y, lr, lc)?;
    for g in [gamma_r, gamma_c] {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::Parameter(format!("gamma = {g} must be finite and ≥ 0")));
        }
    }
    let left = shifted(lr, gamma_r)?;
    let mut x = left.solve(y);
    // X (I + γc Lc)⁻¹ = ((I + γc Lc)⁻¹ Xᵀ)ᵀ by symmetry
    let right = shifted(lc, gamma_c)?;
    x = right.solve(&x.transpose()).transpose();
    Ok(x)
}

fn shifted(l: &LaplacianMatrix, gamma: f64) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = l.size();
    let m = DMatrix::identity(n, n) + l.to_dense() * gamma;
    m.cholesky()
        .ok_or_else(|| Error::Numerical("I + γL is not positive definite".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{knn_graph, laplacian, Axis, DataMatrix, KnnParams, LaplacianKind};
    use crate::spectral::eigendecompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64) -> (DMatrix<f64>, LaplacianMatrix, LaplacianMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DMatrix::from_fn(14, 11, |_, _| rng.gen::<f64>());
        let data = DataMatrix::new(y.clone()).unwrap();
        let lr = laplacian(&knn_graph(&data, Axis::Rows, &KnnParams::new(3)).unwrap(), LaplacianKind::Normalized);
        let lc = laplacian(&knn_graph(&data, Axis::Columns, &KnnParams::new(3)).unwrap(), LaplacianKind::Unnormalized);
        (y, lr, lc)
    }

    #[test]
    fn zero_gamma_is_identity() {
        let (y, lr, lc) = instance(1);
        let x = tikhonov_closed_form(&y, &lr, &lc, 0.0, 0.0).unwrap();
        assert!((x - &y).amax() < 1e-14);
    }

    #[test]
    fn low_frequency_outer_product_is_unchanged() {
        let (_, lr, lc) = instance(2);
        let p = eigendecompose(&lr, None).unwrap();
        let q = eigendecompose(&lc, None).unwrap();
        let y = p.eigenvectors().column(0) * q.eigenvectors().column(0).transpose();
        let x = tikhonov_closed_form(&y, &lr, &lc, 3.0, 5.0).unwrap();
        assert!((x - &y).amax() < 1e-10);
    }

    #[test]
    fn direct_solve_matches_spectral_formula() {
        let (y, lr, lc) = instance(3);
        let (gr, gc) = (0.7, 2.5);
        let p = eigendecompose(&lr, None).unwrap();
        let q = eigendecompose(&lc, None).unwrap();
        let mut yh = p.eigenvectors().transpose() * &y * q.eigenvectors();
        for i in 0..yh.nrows() {
            for j in 0..yh.ncols() {
                yh[(i, j)] /= (1.0 + gr * p.eigenvalues()[i]) * (1.0 + gc * q.eigenvalues()[j]);
            }
        }
        let spectral = p.eigenvectors() * yh * q.eigenvectors().transpose();
        let direct = tikhonov_closed_form(&y, &lr, &lc, gr, gc).unwrap();
        assert!((direct - spectral).amax() < 1e-8);
    }
}
