use lrmg::graph::{knn_graph, Axis, KnnParams, Metric, Sigma, Weighting};
use lrmg::io::write_graph_path;
use lrmg::DataMatrix;

use super::{manifest_beside, read_matrix};
use crate::error::{with_path, CliResult};
use crate::params::Params;
use crate::{GraphBuildArgs, Outcome};

pub fn build(a: GraphBuildArgs, p: &mut Params) -> CliResult<Outcome> {
    let input = p.input("input", a.input)?;
    let axis = p.get("axis", a.axis, Some(Axis::Columns))?;
    let k = p.get("k", a.k, Some(10))?;
    let weighting = p.get("weighting", a.weighting, Some(Weighting::Gaussian))?;
    let sigma = p.get("sigma", a.sigma, Some(Sigma::Auto))?;
    let metric = p.get("metric", a.metric, Some(Metric::Euclidean))?;
    let out = p.get::<String>("out", a.out, None)?;

    let data = DataMatrix::new(read_matrix(&input)?)?;
    let params = KnnParams::new(k).weighting(weighting).sigma(sigma).metric(metric);
    let g = knn_graph(&data, axis, &params)?;
    with_path(&out, write_graph_path(&out, &g))?;
    Ok(Outcome {
        default_manifest: manifest_beside(&out),
        outputs: vec![out],
        seed: None,
    })
}
