use std::fmt;
use std::path::Path;
use std::str::FromStr;

use lrmg::io::write_graph_path;
use lrmg::synth::{add_noise, make_lrmg, make_manifold, GraphSource, NoiseModel, NoisePlacement};

use super::{manifest_beside, out_dir, read_matrix, write_matrix};
use crate::error::{with_path, CliResult};
use crate::params::Params;
use crate::{LowrankArgs, ManifoldArgs, NoiseArgs, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    Sparse,
    ColumnOutliers,
}

impl FromStr for NoiseKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "sparse" => Ok(NoiseKind::Sparse),
            "column-outliers" | "column_outliers" => Ok(NoiseKind::ColumnOutliers),
            other => Err(format!("unknown noise model `{other}` (gaussian, sparse, column-outliers)")),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Sparse => "sparse",
            NoiseKind::ColumnOutliers => "column-outliers",
        })
    }
}

pub fn lowrank(a: LowrankArgs, p: &mut Params) -> CliResult<Outcome> {
    let rows = p.get("p", a.p, None)?;
    let cols = p.get("n", a.n, None)?;
    let k_r = p.get("k_r", a.k_r, Some(10))?;
    let k_c = p.get("k_c", a.k_c, Some(10))?;
    let seed = p.get("seed", a.seed, Some(0))?;
    let dir = p.get::<String>("out_dir", a.out_dir, None)?;

    let inst = make_lrmg(rows, cols, k_r, k_c, seed, GraphSource::RandomDataKnn)?;
    let dir = out_dir(&dir)?;
    let mut outputs = vec![
        write_matrix(&dir.join("clean.csv"), &inst.y_star)?,
        write_matrix(&dir.join("coeffs.csv"), &inst.coeffs)?,
    ];
    if let Some((gr, gc)) = &inst.graphs {
        for (name, g) in [("row.graph", gr), ("col.graph", gc)] {
            let path = dir.join(name).display().to_string();
            with_path(&path, write_graph_path(&path, g))?;
            outputs.push(path);
        }
    }
    Ok(Outcome {
        default_manifest: dir.join("manifest.json"),
        outputs,
        seed: Some(seed),
    })
}

pub fn noise(a: NoiseArgs, p: &mut Params) -> CliResult<Outcome> {
    let input = p.input("input", a.input)?;
    let kind = p.get("model", a.model, Some(NoiseKind::Gaussian))?;
    let model = match kind {
        NoiseKind::Gaussian => NoiseModel::Gaussian {
            sigma: p.get("sigma", a.sigma, None)?,
        },
        NoiseKind::Sparse => NoiseModel::Sparse {
            fraction: p.get("fraction", a.fraction, None)?,
            amplitude: p.get("amplitude", a.amplitude, None)?,
        },
        NoiseKind::ColumnOutliers => NoiseModel::ColumnOutliers {
            fraction: p.get("fraction", a.fraction, None)?,
        },
    };
    let seed = p.get("seed", a.seed, Some(0))?;
    let out = p.get::<String>("out", a.out, None)?;

    let y = add_noise(&read_matrix(&input)?, model, seed)?;
    Ok(Outcome {
        default_manifest: manifest_beside(&out),
        outputs: vec![write_matrix(Path::new(&out), &y)?],
        seed: Some(seed),
    })
}

pub fn manifold(a: ManifoldArgs, p: &mut Params) -> CliResult<Outcome> {
    let kind = p.get("kind", a.kind, None)?;
    let n = p.get("n", a.n, None)?;
    let sigma = p.get("sigma", a.sigma, Some(0.0))?;
    let placement = p.get("placement", a.placement, Some(NoisePlacement::Ambient))?;
    let seed = p.get("seed", a.seed, Some(0))?;
    let out = p.get::<String>("out", a.out, None)?;

    let m = make_manifold(kind, n, sigma, placement, seed)?;
    Ok(Outcome {
        default_manifest: manifest_beside(&out),
        outputs: vec![write_matrix(Path::new(&out), m.values())?],
        seed: Some(seed),
    })
}
