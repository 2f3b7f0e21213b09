use lrmg::diagnostics::{alignment_report, covariance, diagnostics_report, error_bound_check};
use lrmg::spectral::eigendecompose;
use lrmg::{Axis, LaplacianKind};

use super::{load_laplacian, out_dir, read_matrix, write_matrix};
use crate::error::CliResult;
use crate::params::Params;
use crate::{DiagnoseArgs, Outcome};

pub fn run(a: DiagnoseArgs, p: &mut Params) -> CliResult<Outcome> {
    let input = p.input("input", a.input)?;
    let row_graph = p.input("row_graph", a.row_graph)?;
    let col_graph = p.input("col_graph", a.col_graph)?;
    let k_r = p.get("k_r", a.k_r, Some(10))?;
    let k_c = p.get("k_c", a.k_c, Some(10))?;
    let kind = p.get("laplacian", a.laplacian, Some(LaplacianKind::Normalized))?;
    let clean = p.optional_input("clean", a.clean)?;
    let dir = p.get::<String>("out_dir", a.out_dir, None)?;

    let x = read_matrix(&input)?;
    let row_basis = eigendecompose(&load_laplacian(Some(&row_graph), x.nrows(), "p (rows)", kind)?, None)?;
    let col_basis = eigendecompose(&load_laplacian(Some(&col_graph), x.ncols(), "n (columns)", kind)?, None)?;

    let rows = alignment_report(&row_basis, &covariance(&x, Axis::Rows)?, k_r)?;
    let cols = alignment_report(&col_basis, &covariance(&x, Axis::Columns)?, k_c)?;

    let bound = match clean {
        None => None,
        Some(clean) => {
            let noisy = p.input("noisy", a.noisy)?;
            let gamma = p.get("gamma", a.gamma, None)?;
            let loss = p.get("loss", a.loss, None)?;
            let y_star = read_matrix(&clean)?;
            let y = read_matrix(&noisy)?;
            if y.shape() != y_star.shape() {
                return Err(lrmg::Error::DimensionMismatch(format!(
                    "{noisy} is {}x{} but {clean} is {}x{}",
                    y.nrows(),
                    y.ncols(),
                    y_star.nrows(),
                    y_star.ncols()
                ))
                .into());
            }
            let noise = &y - &y_star;
            Some(error_bound_check(&y_star, &noise, &x, &row_basis, &col_basis, k_r, k_c, gamma, loss)?)
        }
    };
    let report = diagnostics_report(&x, &row_basis, &col_basis, k_r, k_c, bound)?;

    let dir = out_dir(&dir)?;
    let mut outputs = Vec::new();
    for (name, text) in [
        ("alignment_rows.txt", rows.to_text()),
        ("alignment_cols.txt", cols.to_text()),
        ("diagnostics.txt", report.to_text()),
        ("singular_values.csv", report.singular_values_csv()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        outputs.push(path.display().to_string());
    }
    // alignment matrices as 20·log10|Γ|
    outputs.push(write_matrix(&dir.join("gamma_rows_20log10.csv"), &rows.gamma_db())?);
    outputs.push(write_matrix(&dir.join("gamma_cols_20log10.csv"), &cols.gamma_db())?);
    outputs.push(write_matrix(&dir.join("coherence_vtq.csv"), &report.coherence.sigma_vt_q)?);
    outputs.push(write_matrix(&dir.join("coherence_utp.csv"), &report.coherence.sigma_ut_p)?);
    Ok(Outcome {
        default_manifest: dir.join("manifest.json"),
        outputs,
        seed: None,
    })
}
