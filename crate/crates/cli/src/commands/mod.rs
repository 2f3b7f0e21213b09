pub mod diagnose;
pub mod graph;
pub mod solve;
pub mod spectra;
pub mod synth;

use std::path::{Path, PathBuf};

use lrmg::io::{read_graph_path, read_matrix_csv_path, write_matrix_csv_path};
use lrmg::graph::laplacian;
use lrmg::{Error, LaplacianKind, LaplacianMatrix, SparseGraph};
use nalgebra::DMatrix;

use crate::error::{with_path, CliResult};

pub fn read_matrix(path: &str) -> CliResult<DMatrix<f64>> {
    with_path(path, read_matrix_csv_path(path))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> CliResult<String> {
    let name = path.display().to_string();
    with_path(&name, write_matrix_csv_path(path, m))?;
    Ok(name)
}

/// Laplacian of the graph file at `path`, or of an edgeless graph when absent.
/// `what` names the dimension the graph must match, for error messages.
pub fn load_laplacian(path: Option<&str>, size: usize, what: &str, kind: LaplacianKind) -> CliResult<LaplacianMatrix> {
    let g = match path {
        Some(p) => {
            let g = with_path(p, read_graph_path(p))?;
            if g.num_vertices() != size {
                return Err(Error::DimensionMismatch(format!(
                    "{p} has {} vertices but the matrix has {what} = {size}",
                    g.num_vertices()
                ))
                .into());
            }
            g
        }
        None => SparseGraph::from_edges(size, [])?,
    };
    Ok(laplacian(&g, kind))
}

pub fn out_dir(dir: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(PathBuf::from(dir))
}

pub fn manifest_beside(out: &str) -> PathBuf {
    PathBuf::from(format!("{out}.manifest.json"))
}
