//! Seeded generators: low-rank matrices on graphs, noise models and sampled
//! manifolds.
//!
//! Every generator draws from a `ChaCha20Rng` seeded with `seed_from_u64`, and
//! normal variates come from `rand_distr::StandardNormal`, so output is
//! identical across runs and platforms for a given seed.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::diagnostics::singular_values;
use crate::error::{Error, Result};
use crate::graph::{knn_graph, laplacian, Axis, DataMatrix, KnnParams, LaplacianKind, LaplacianMatrix, SparseGraph};
use crate::spectral::{eigendecompose, EigenBasis};

fn gaussian_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Where the graphs of a generated instance come from.
#[derive(Debug, Clone)]
pub enum GraphSource {
    /// KNN graphs (`k = 10`, capped at count − 1; Gaussian weights; normalized
    /// Laplacian) on the rows and columns of an auxiliary random Gaussian matrix
    /// of rank `max(k_r, k_c)`.
    RandomDataKnn,
    /// Caller-supplied row (`p × p`) and column (`n × n`) Laplacians.
    Given {
        row: LaplacianMatrix,
        col: LaplacianMatrix,
    },
}

#[derive(Debug, Clone)]
pub struct LrmgInstance {
    /// `Y* = P_kr · C · Q_kcᵀ`
    pub y_star: DMatrix<f64>,
    /// Standard-normal coefficients `C`, `k_r × k_c`.
    pub coeffs: DMatrix<f64>,
    /// KNN graphs behind the Laplacians; `None` for [`GraphSource::Given`].
    pub graphs: Option<(SparseGraph, SparseGraph)>,
    pub row_laplacian: LaplacianMatrix,
    pub col_laplacian: LaplacianMatrix,
    pub row_basis: EigenBasis,
    pub col_basis: EigenBasis,
    pub k_r: usize,
    pub k_c: usize,
    pub seed: u64,
}

/// Draws a matrix whose columns lie in the span of the first `k_r` row-graph
/// eigenvectors and whose rows lie in the span of the first `k_c` column-graph
/// eigenvectors.
pub fn make_lrmg(p: usize, n: usize, k_r: usize, k_c: usize, seed: u64, source: GraphSource) -> Result<LrmgInstance> {
    if k_r == 0 || k_r > p || k_c == 0 || k_c > n {
        return Err(Error::Parameter(format!(
            "need 1 ≤ k_r ≤ p and 1 ≤ k_c ≤ n, got k_r={k_r}, k_c={k_c}, p={p}, n={n}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (row_laplacian, col_laplacian, graphs) = match source {
        GraphSource::Given { row, col } => {
            if row.size() != p || col.size() != n {
                return Err(Error::DimensionMismatch(format!(
                    "graphs have {} and {} vertices, expected {p} and {n}",
                    row.size(),
                    col.size()
                )));
            }
            (row, col, None)
        }
        GraphSource::RandomDataKnn => {
            if p < 2 || n < 2 {
                return Err(Error::Parameter("random graphs need p, n ≥ 2".into()));
            }
            let r = k_r.max(k_c);
            let aux = gaussian_matrix(&mut rng, p, r) * gaussian_matrix(&mut rng, r, n);
            let data = DataMatrix::new(aux)?;
            let build = |axis, count: usize| knn_graph(&data, axis, &KnnParams::new(10.min(count - 1)));
            let (gr, gc) = (build(Axis::Rows, p)?, build(Axis::Columns, n)?);
            (
                laplacian(&gr, LaplacianKind::Normalized),
                laplacian(&gc, LaplacianKind::Normalized),
                Some((gr, gc)),
            )
        }
    };
    let row_basis = eigendecompose(&row_laplacian, None)?;
    let col_basis = eigendecompose(&col_laplacian, None)?;
    let coeffs = gaussian_matrix(&mut rng, k_r, k_c);
    let y_star = row_basis.low(k_r) * &coeffs * col_basis.low(k_c).transpose();

    let sv = singular_values(&y_star);
    let rank = k_r.min(k_c);
    if sv[rank - 1].is_nan() || sv[rank - 1] <= 1e-8 * sv[0] {
        return Err(Error::Numerical(format!(
            "generated matrix has rank below {rank}"
        )));
    }
    Ok(LrmgInstance {
        y_star,
        coeffs,
        graphs,
        row_laplacian,
        col_laplacian,
        row_basis,
        col_basis,
        k_r,
        k_c,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// i.i.d. `N(0, σ²)` added to every entry.
    Gaussian { sigma: f64 },
    /// `round(fraction·pn)` entries, chosen uniformly, set to `±amplitude`.
    Sparse { fraction: f64, amplitude: f64 },
    /// `round(fraction·n)` columns replaced by `N(0, var(Y))` draws.
    ColumnOutliers { fraction: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let frac = |f: f64| {
            if (0.0..=1.0).contains(&f) {
                Ok(())
            } else {
                Err(Error::Parameter(format!("fraction {f} outside [0, 1]")))
            }
        };
        match *self {
            NoiseModel::Gaussian { sigma } if !(sigma.is_finite() && sigma >= 0.0) => {
                Err(Error::Parameter(format!("sigma {sigma} must be finite and ≥ 0")))
            }
            NoiseModel::Sparse { amplitude, .. } if !amplitude.is_finite() => {
                Err(Error::Parameter(format!("amplitude {amplitude} must be finite")))
            }
            NoiseModel::Sparse { fraction, .. } | NoiseModel::ColumnOutliers { fraction } => frac(fraction),
            _ => Ok(()),
        }
    }
}

pub fn add_noise(y: &DMatrix<f64>, model: NoiseModel, seed: u64) -> Result<DMatrix<f64>> {
    model.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (p, n) = y.shape();
    let mut out = y.clone();
    match model {
        NoiseModel::Gaussian { sigma } => {
            if sigma > 0.0 {
                out += gaussian_matrix(&mut rng, p, n) * sigma;
            }
        }
        NoiseModel::Sparse { fraction, amplitude } => {
            let total = p * n;
            let count = ((fraction * total as f64).round() as usize).min(total);
            for idx in sample(&mut rng, total, count) {
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                // column-major storage index
                out[idx] = sign * amplitude;
            }
        }
        NoiseModel::ColumnOutliers { fraction } => {
            let count = ((fraction * n as f64).round() as usize).min(n);
            let mean = y.mean();
            let var = if y.is_empty() {
                0.0
            } else {
                y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64
            };
            let sd = var.sqrt();
            let mut cols: Vec<usize> = sample(&mut rng, n, count).into_vec();
            cols.sort_unstable();
            for c in cols {
                for r in 0..p {
                    let z: f64 = rng.sample(StandardNormal);
                    out[(r, c)] = sd * z;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    /// Unit circle in the plane.
    Circle2d,
    /// Two-turn Archimedean spiral in the plane.
    Spiral2d,
    /// Swiss roll in 3-D.
    SwissRoll3d,
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circle2d" | "circle" => Ok(ManifoldKind::Circle2d),
            "spiral2d" | "spiral" => Ok(ManifoldKind::Spiral2d),
            "swissroll3d" | "swissroll" | "swiss_roll" => Ok(ManifoldKind::SwissRoll3d),
            other => Err(Error::Parameter(format!("unknown manifold '{other}'"))),
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ManifoldKind::Circle2d => "circle2d",
            ManifoldKind::Spiral2d => "spiral2d",
            ManifoldKind::SwissRoll3d => "swissroll3d",
        })
    }
}

/// Where manifold noise is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoisePlacement {
    /// Every ambient coordinate.
    #[default]
    Ambient,
    /// One extra appended coordinate; the clean coordinates are untouched.
    ExtraDim,
}

impl FromStr for NoisePlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ambient" => Ok(NoisePlacement::Ambient),
            "extra_dim" | "extra-dim" | "extra" => Ok(NoisePlacement::ExtraDim),
            other => Err(Error::Parameter(format!("unknown noise placement '{other}'"))),
        }
    }
}

impl fmt::Display for NoisePlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoisePlacement::Ambient => "ambient",
            NoisePlacement::ExtraDim => "extra_dim",
        })
    }
}

/// Samples `n` points (as columns) at evenly spaced parameter values.
pub fn make_manifold(
    kind: ManifoldKind,
    n: usize,
    noise_sigma: f64,
    placement: NoisePlacement,
    seed: u64,
) -> Result<DataMatrix> {
    if n < 10 {
        return Err(Error::Parameter(format!("need at least 10 points, got {n}")));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::Parameter(format!("noise sigma {noise_sigma} must be finite and ≥ 0")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    let frac = |i: usize| i as f64 / n as f64;
    let clean = match kind {
        ManifoldKind::Circle2d => DMatrix::from_fn(2, n, |r, i| {
            let a = tau * frac(i);
            if r == 0 {
                a.cos()
            } else {
                a.sin()
            }
        }),
        ManifoldKind::Spiral2d => DMatrix::from_fn(2, n, |r, i| {
            let t = frac(i);
            let (radius, a) = (0.1 + t, 2.0 * tau * t);
            if r == 0 {
                radius * a.cos()
            } else {
                radius * a.sin()
            }
        }),
        ManifoldKind::SwissRoll3d => {
            let heights: Vec<f64> = (0..n).map(|_| 10.0 * rng.gen::<f64>()).collect();
            DMatrix::from_fn(3, n, |r, i| {
                let t = 0.75 * tau * (1.0 + 2.0 * frac(i));
                match r {
                    0 => t * t.cos(),
                    1 => heights[i],
                    _ => t * t.sin(),
                }
            })
        }
    };
    let out = match placement {
        NoisePlacement::Ambient => {
            let dims = clean.nrows();
            clean + gaussian_matrix(&mut rng, dims, n) * noise_sigma
        }
        NoisePlacement::ExtraDim => {
            let dims = clean.nrows();
            let mut m = clean.insert_row(dims, 0.0);
            for i in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                m[(dims, i)] = noise_sigma * z;
            }
            m
        }
    };
    DataMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SparseGraph;

    #[test]
    fn rank_one_instance() {
        let inst = make_lrmg(12, 15, 1, 1, 3, GraphSource::RandomDataKnn).unwrap();
        let sv = singular_values(&inst.y_star);
        assert!(sv[1] <= 1e-10 * sv[0]);
    }

    #[test]
    fn band_limited_by_construction() {
        let inst = make_lrmg(30, 40, 4, 3, 7, GraphSource::RandomDataKnn).unwrap();
        let norm = inst.y_star.norm();
        let row_high = inst.row_basis.high(4).transpose() * &inst.y_star;
        let col_high = &inst.y_star * inst.col_basis.high(3);
        assert!(row_high.norm() <= 1e-8 * norm);
        assert!(col_high.norm() <= 1e-8 * norm);
        let sv = singular_values(&inst.y_star);
        assert!(sv[2] > 1e-8 * sv[0] && sv[3] <= 1e-8 * sv[0]);
    }

    #[test]
    fn deterministic_and_checked() {
        let a = make_lrmg(10, 10, 2, 2, 11, GraphSource::RandomDataKnn).unwrap();
        let b = make_lrmg(10, 10, 2, 2, 11, GraphSource::RandomDataKnn).unwrap();
        assert_eq!(a.y_star, b.y_star);
        assert!(make_lrmg(10, 10, 0, 2, 1, GraphSource::RandomDataKnn).is_err());
        assert!(make_lrmg(10, 10, 2, 11, 1, GraphSource::RandomDataKnn).is_err());
    }

    #[test]
    fn given_graphs_are_used() {
        let path = |n: usize| {
            let g = SparseGraph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap();
            laplacian(&g, LaplacianKind::Normalized)
        };
        let inst = make_lrmg(6, 8, 2, 2, 1, GraphSource::Given { row: path(6), col: path(8) }).unwrap();
        assert_eq!(inst.row_laplacian.size(), 6);
        assert!(make_lrmg(6, 8, 2, 2, 1, GraphSource::Given { row: path(8), col: path(6) }).is_err());
    }

    #[test]
    fn noise_models() {
        let y = DMatrix::from_fn(10, 20, |i, j| (i + j) as f64 * 0.1);
        assert_eq!(add_noise(&y, NoiseModel::Gaussian { sigma: 0.0 }, 1).unwrap(), y);
        assert_eq!(add_noise(&y, NoiseModel::Sparse { fraction: 0.0, amplitude: 5.0 }, 1).unwrap(), y);
        assert_eq!(add_noise(&y, NoiseModel::ColumnOutliers { fraction: 0.0 }, 1).unwrap(), y);

        let all = add_noise(&y, NoiseModel::Sparse { fraction: 1.0, amplitude: 3.0 }, 2).unwrap();
        assert!(all.iter().all(|v| v.abs() == 3.0));

        let some = add_noise(&y, NoiseModel::Sparse { fraction: 0.13, amplitude: 9.0 }, 3).unwrap();
        assert_eq!((some - &y).iter().filter(|v| **v != 0.0).count(), 26);

        let out = add_noise(&y, NoiseModel::ColumnOutliers { fraction: 0.25 }, 4).unwrap();
        let changed = (0..20).filter(|&c| out.column(c) != y.column(c)).count();
        assert_eq!(changed, 5);

        assert!(add_noise(&y, NoiseModel::Sparse { fraction: 1.5, amplitude: 1.0 }, 1).is_err());
        assert!(add_noise(&y, NoiseModel::Gaussian { sigma: -1.0 }, 1).is_err());
    }

    #[test]
    fn gaussian_noise_level() {
        let mut y = DMatrix::from_fn(50, 80, |i, j| ((i * 7 + j * 3) % 11) as f64 + 1.0);
        for mut c in y.column_iter_mut() {
            let n = c.norm();
            c /= n;
        }
        let noisy = add_noise(&y, NoiseModel::Gaussian { sigma: 0.1 }, 5).unwrap();
        let ratio = (noisy - &y).norm() / y.norm();
        let expect = 0.1 * (50.0f64 * 80.0).sqrt() / y.norm();
        assert!((ratio / expect - 1.0).abs() < 0.1);
    }

    #[test]
    fn manifolds() {
        let c = make_manifold(ManifoldKind::Circle2d, 100, 0.0, NoisePlacement::Ambient, 1).unwrap();
        for col in c.values().column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        let e = make_manifold(ManifoldKind::Circle2d, 4000, 0.2, NoisePlacement::ExtraDim, 2).unwrap();
        assert_eq!(e.nrows(), 3);
        let z = e.values().row(2);
        let mean = z.mean();
        let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / z.len() as f64).sqrt();
        assert!(mean.abs() < 0.02 && (sd / 0.2 - 1.0).abs() < 0.1);
        assert_eq!(make_manifold(ManifoldKind::SwissRoll3d, 50, 0.1, NoisePlacement::Ambient, 3).unwrap().nrows(), 3);
        assert!(make_manifold(ManifoldKind::Circle2d, 9, 0.0, NoisePlacement::Ambient, 1).is_err());
        assert!("torus".parse::<ManifoldKind>().is_err());
    }

    #[test]
    fn spiral_neighbours_follow_parameter() {
        let s = make_manifold(ManifoldKind::Spiral2d, 500, 0.0, NoisePlacement::Ambient, 1).unwrap();
        let g = knn_graph(&s, Axis::Columns, &KnnParams::new(2)).unwrap();
        let hits = (0..499).filter(|&i| g.weight(i, i + 1) > 0.0).count();
        assert!(hits as f64 >= 0.95 * 499.0);
    }
}
