//! Small dense/sparse kernels shared by the operator modules.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

/// `A · X` for a sparse `A`.
pub(crate) fn sparse_left(a: &CsrMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), x.ncols());
    for c in 0..x.ncols() {
        let xc = x.column(c);
        let mut oc = out.column_mut(c);
        for (i, row) in a.row_iter().enumerate() {
            let mut acc = 0.0;
            for (&j, &v) in row.col_indices().iter().zip(row.values()) {
                acc += v * xc[j];
            }
            oc[i] = acc;
        }
    }
    out
}

/// `X · A` for a sparse `A`.
pub(crate) fn sparse_right(x: &DMatrix<f64>, a: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), a.ncols());
    for (i, row) in a.row_iter().enumerate() {
        let xi = x.column(i).clone_owned();
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            out.column_mut(j).axpy(v, &xi, 1.0);
        }
    }
    out
}

pub(crate) fn sparse_matvec(a: &CsrMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        a.nrows(),
        a.row_iter().map(|row| {
            row.col_indices()
                .iter()
                .zip(row.values())
                .map(|(&j, &v)| v * x[j])
                .sum::<f64>()
        }),
    )
}

/// Flips each column so that its first entry with magnitude above `tol` is positive.
/// Returns the applied signs.
pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>, tol: f64) -> Vec<f64> {
    let mut signs = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let s = match col.iter().find(|v| v.abs() > tol) {
            Some(v) if *v < 0.0 => -1.0,
            _ => 1.0,
        };
        if s < 0.0 {
            col.neg_mut();
        }
        signs.push(s);
    }
    signs
}
