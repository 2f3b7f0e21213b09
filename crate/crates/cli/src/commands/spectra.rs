use std::fs::File;
use std::io::BufWriter;

use lrmg::io::{write_filter_curve_csv, write_spectra_csv};
use lrmg::spectral::eigendecompose;
use lrmg::LaplacianKind;

use super::manifest_beside;
use crate::error::{with_path, CliResult};
use crate::params::Params;
use crate::{EigenArgs, FilterArgs, Outcome};

pub fn eigen(a: EigenArgs, p: &mut Params) -> CliResult<Outcome> {
    let graph = p.input("graph", a.graph)?;
    let kind = p.get("laplacian", a.laplacian, Some(LaplacianKind::Normalized))?;
    let out = p.get::<String>("out", a.out, None)?;

    let g = with_path(&graph, lrmg::io::read_graph_path(&graph))?;
    let basis = eigendecompose(&lrmg::graph::laplacian(&g, kind), None)?;
    let w = BufWriter::new(File::create(&out)?);
    with_path(&out, write_spectra_csv(w, basis.eigenvalues()))?;
    Ok(Outcome {
        default_manifest: manifest_beside(&out),
        outputs: vec![out],
        seed: None,
    })
}

pub fn filter(a: FilterArgs, p: &mut Params) -> CliResult<Outcome> {
    let b = p.get("b", a.b, None)?;
    let gamma = p.get("gamma", a.gamma, Some(1.0))?;
    let x_max = p.get("x_max", a.x_max, Some(2.0))?;
    let points = p.get("points", a.points, Some(201))?;
    let out = p.get::<String>("out", a.out, None)?;

    let w = BufWriter::new(File::create(&out)?);
    with_path(&out, write_filter_curve_csv(w, b, gamma, x_max, points))?;
    Ok(Outcome {
        default_manifest: manifest_beside(&out),
        outputs: vec![out],
        seed: None,
    })
}
