//! Similarity graphs between the rows or columns of a data matrix, their
//! Laplacians, and the degree-normalized graph gradient/divergence pair.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::linalg;
use crate::spectral;

/// Which family of vectors of a `p × n` matrix a graph connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// One vertex per row (feature); the row graph `G_r`.
    Rows,
    /// One vertex per column (sample); the column graph `G_c`.
    Columns,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" | "row" => Ok(Axis::Rows),
            "columns" | "cols" | "column" => Ok(Axis::Columns),
            other => Err(Error::Parameter(format!("unknown axis `{other}`"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Rows => "rows",
            Axis::Columns => "columns",
        })
    }
}

/// A `p × n` data matrix with rows as features and columns as samples.
///
/// Only finite entries are accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        for c in 0..values.ncols() {
            for r in 0..values.nrows() {
                if !values[(r, c)].is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(DataMatrix(values))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Number of features `p`.
    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    /// Number of samples `n`.
    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn transpose(&self) -> DataMatrix {
        DataMatrix(self.0.transpose())
    }

    /// Number of vectors a graph along `axis` would have as vertices.
    pub fn count_along(&self, axis: Axis) -> usize {
        match axis {
            Axis::Rows => self.nrows(),
            Axis::Columns => self.ncols(),
        }
    }

    /// The vectors along `axis`, stored as the columns of the returned matrix.
    fn vectors(&self, axis: Axis) -> DMatrix<f64> {
        match axis {
            Axis::Rows => self.0.transpose(),
            Axis::Columns => self.0.clone(),
        }
    }
}

/// Edge weighting scheme applied to retained nearest-neighbour pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// `exp(−d²/σ²)`
    Gaussian,
    Binary,
    /// Cosine similarity `yᵢᵀyⱼ / (‖yᵢ‖‖yⱼ‖)`; negative similarities are dropped.
    Correlation,
}

impl FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Weighting::Gaussian),
            "binary" => Ok(Weighting::Binary),
            "correlation" => Ok(Weighting::Correlation),
            other => Err(Error::Parameter(format!("unknown weighting `{other}`"))),
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Gaussian => "gaussian",
            Weighting::Binary => "binary",
            Weighting::Correlation => "correlation",
        })
    }
}

/// Distance used for the neighbour search and the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// ℓ1 distance, for data with outliers.
    Manhattan,
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" | "euclidean" => Ok(Metric::Euclidean),
            "l1" | "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::Parameter(format!("unknown metric `{other}`"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        })
    }
}

/// Gaussian kernel width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    /// σ² is the mean squared distance over all retained neighbour pairs.
    Auto,
    Fixed(f64),
}

impl FromStr for Sigma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Sigma::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(Sigma::Fixed(v)),
            _ => Err(Error::Parameter(format!(
                "sigma must be `auto` or a positive number, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma::Auto => f.write_str("auto"),
            Sigma::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub k: usize,
    pub weighting: Weighting,
    pub sigma: Sigma,
    pub metric: Metric,
}

impl KnnParams {
    /// Gaussian weighting, automatic σ, Euclidean distance.
    pub fn new(k: usize) -> Self {
        KnnParams {
            k,
            weighting: Weighting::Gaussian,
            sigma: Sigma::Auto,
            metric: Metric::Euclidean,
        }
    }

    pub fn weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn sigma(mut self, sigma: Sigma) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Weighted undirected graph with a symmetric, non-negative, zero-diagonal
/// weight matrix.
///
/// Edges are stored once with `i < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    num_vertices: usize,
    edges: Vec<Edge>,
    adjacency: CsrMatrix<f64>,
}

impl SparseGraph {
    /// Builds a graph from undirected edges given in either orientation.
    ///
    /// Self-loops, out-of-range vertices, negative or non-finite weights and
    /// repeated vertex pairs are rejected.
    pub fn from_edges<I>(num_vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if num_vertices == 0 {
            return Err(Error::Parameter("graph needs at least one vertex".into()));
        }
        let mut map = BTreeMap::new();
        for (a, b, w) in edges {
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::Parameter(format!(
                    "edge ({a}, {b}) out of range for {num_vertices} vertices"
                )));
            }
            if a == b {
                return Err(Error::Parameter(format!("self-loop at vertex {a}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Parameter(format!(
                    "edge ({a}, {b}) has invalid weight {w}"
                )));
            }
            let key = (a.min(b), a.max(b));
            if map.insert(key, w).is_some() {
                return Err(Error::Parameter(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
        }
        Ok(Self::from_sorted(num_vertices, map))
    }

    fn from_sorted(num_vertices: usize, map: BTreeMap<(usize, usize), f64>) -> Self {
        let edges: Vec<Edge> = map
            .into_iter()
            .map(|((i, j), weight)| Edge { i, j, weight })
            .collect();
        let mut coo = CooMatrix::new(num_vertices, num_vertices);
        for e in &edges {
            coo.push(e.i, e.j, e.weight);
            coo.push(e.j, e.i, e.weight);
        }
        SparseGraph {
            num_vertices,
            edges,
            adjacency: CsrMatrix::from(&coo),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Symmetric weight matrix `W`.
    pub fn adjacency(&self) -> &CsrMatrix<f64> {
        &self.adjacency
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|e| (e.i, e.j).cmp(&(a, b)))
            .map(|idx| self.edges[idx].weight)
            .unwrap_or(0.0)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let row = self.adjacency.row(i);
        row.col_indices()
            .iter()
            .copied()
            .zip(row.values().iter().copied())
            .collect::<Vec<_>>()
            .into_iter()
    }

    /// `d(i) = Σ_j W(i, j)`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.num_vertices];
        for e in &self.edges {
            d[e.i] += e.weight;
            d[e.j] += e.weight;
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.num_vertices, self.num_vertices);
        for e in &self.edges {
            w[(e.i, e.j)] = e.weight;
            w[(e.j, e.i)] = e.weight;
        }
        w
    }

    /// Component label per vertex, counting only edges with positive weight.
    /// Labels are dense and ordered by smallest member vertex.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.num_vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in self.edges.iter().filter(|e| e.weight > 0.0) {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label_of_root = BTreeMap::new();
        (0..self.num_vertices)
            .map(|v| {
                let root = find(&mut parent, v);
                let next = label_of_root.len();
                *label_of_root.entry(root).or_insert(next)
            })
            .collect()
    }

    pub fn connected_components(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }
}

/// Exact K-nearest-neighbour graph between the rows or columns of `data`.
///
/// Each vector is linked to its `k` closest vectors (ties broken by smaller
/// index); the directed relation is symmetrized with `W ← max(W, Wᵀ)`.
pub fn knn_graph(data: &DataMatrix, axis: Axis, params: &KnnParams) -> Result<SparseGraph> {
    let vectors = data.vectors(axis);
    let m = vectors.ncols();
    if m < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 vectors along {axis:?}, got {m}"
        )));
    }
    if params.k == 0 || params.k >= m {
        return Err(Error::Parameter(format!(
            "k = {} must satisfy 1 ≤ k < {m} (vectors along {axis:?})",
            params.k
        )));
    }
    if let Sigma::Fixed(s) = params.sigma {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Parameter(format!("sigma must be positive, got {s}")));
        }
    }
    let norms: Vec<f64> = vectors.column_iter().map(|c| c.norm()).collect();
    if params.weighting == Weighting::Correlation {
        if let Some(i) = norms.iter().position(|&v| v == 0.0) {
            return Err(Error::DegenerateInput(format!(
                "vector {i} has zero norm; correlation weighting is undefined"
            )));
        }
    }

    // squared distances, upper triangle mirrored
    let mut dist2 = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let a = vectors.column(i);
            let b = vectors.column(j);
            let d = match params.metric {
                Metric::Euclidean => a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum(),
                Metric::Manhattan => a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y).abs())
                    .sum::<f64>()
                    .powi(2),
            };
            dist2[(i, j)] = d;
            dist2[(j, i)] = d;
        }
    }

    let mut pairs = Vec::with_capacity(m * params.k);
    let mut order: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        order.clear();
        order.extend((0..m).filter(|&j| j != i));
        order.sort_by(|&a, &b| dist2[(i, a)].total_cmp(&dist2[(i, b)]).then(a.cmp(&b)));
        pairs.extend(order.iter().take(params.k).map(|&j| (i, j)));
    }

    let sigma2 = match params.sigma {
        Sigma::Fixed(s) => s * s,
        Sigma::Auto => {
            let mean = pairs.iter().map(|&(i, j)| dist2[(i, j)]).sum::<f64>() / pairs.len() as f64;
            if mean > 0.0 {
                mean
            } else {
                1.0
            }
        }
    };

    let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, j) in pairs {
        let w = match params.weighting {
            Weighting::Gaussian => (-dist2[(i, j)] / sigma2).exp(),
            Weighting::Binary => 1.0,
            Weighting::Correlation => {
                let c = vectors.column(i).dot(&vectors.column(j)) / (norms[i] * norms[j]);
                c.clamp(-1.0, 1.0)
            }
        };
        if w <= 0.0 {
            continue;
        }
        let entry = map.entry((i.min(j), i.max(j))).or_insert(0.0);
        *entry = entry.max(w);
    }
    Ok(SparseGraph::from_sorted(m, map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplacianKind {
    /// `I − D^{-1/2} W D^{-1/2}`
    #[default]
    Normalized,
    /// `D − W`
    Unnormalized,
}

impl FromStr for LaplacianKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(LaplacianKind::Normalized),
            "unnormalized" | "combinatorial" => Ok(LaplacianKind::Unnormalized),
            other => Err(Error::Parameter(format!("unknown laplacian kind `{other}`"))),
        }
    }
}

impl fmt::Display for LaplacianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LaplacianKind::Normalized => "normalized",
            LaplacianKind::Unnormalized => "unnormalized",
        })
    }
}

/// Sparse graph Laplacian together with an upper bound on its spectral norm.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    kind: LaplacianKind,
    matrix: CsrMatrix<f64>,
    spectral_norm_bound: f64,
}

/// Laplacian of `g`. Isolated vertices give an all-zero row and column in
/// both kinds.
pub fn laplacian(g: &SparseGraph, kind: LaplacianKind) -> LaplacianMatrix {
    let n = g.num_vertices();
    let d = g.degrees();
    let mut coo = CooMatrix::new(n, n);
    match kind {
        LaplacianKind::Unnormalized => {
            for (i, &di) in d.iter().enumerate() {
                if di != 0.0 {
                    coo.push(i, i, di);
                }
            }
            for e in g.edges() {
                coo.push(e.i, e.j, -e.weight);
                coo.push(e.j, e.i, -e.weight);
            }
        }
        LaplacianKind::Normalized => {
            let inv_sqrt: Vec<f64> = d
                .iter()
                .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 })
                .collect();
            for (i, &di) in d.iter().enumerate() {
                if di > 0.0 {
                    coo.push(i, i, 1.0);
                }
            }
            for e in g.edges() {
                let v = -e.weight * inv_sqrt[e.i] * inv_sqrt[e.j];
                coo.push(e.i, e.j, v);
                coo.push(e.j, e.i, v);
            }
        }
    }
    let matrix = CsrMatrix::from(&coo);
    let has_mass = g.edges().iter().any(|e| e.weight > 0.0);
    let spectral_norm_bound = match kind {
        LaplacianKind::Normalized if has_mass => 2.0,
        LaplacianKind::Normalized => 0.0,
        LaplacianKind::Unnormalized => {
            let max_degree = d.iter().cloned().fold(0.0, f64::max);
            unnormalized_bound(&matrix, max_degree)
        }
    };
    LaplacianMatrix {
        kind,
        matrix,
        spectral_norm_bound,
    }
}

/// Power-iteration estimate with a 1% margin, capped by the Gershgorin bound `2·d_max`.
fn unnormalized_bound(matrix: &CsrMatrix<f64>, max_degree: f64) -> f64 {
    if max_degree == 0.0 {
        return 0.0;
    }
    let est = spectral::power_iteration(matrix, 1e-6, 1000);
    (est * 1.01).min(2.0 * max_degree)
}

impl LaplacianMatrix {
    /// Wraps an arbitrary square sparse matrix. No symmetry check is made here;
    /// [`spectral::eigendecompose`] rejects non-symmetric input.
    pub fn from_matrix(kind: LaplacianKind, matrix: CsrMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Laplacian must be square, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let spectral_norm_bound = match kind {
            LaplacianKind::Normalized => 2.0,
            LaplacianKind::Unnormalized => {
                let gersh = matrix
                    .row_iter()
                    .map(|r| r.values().iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                if gersh == 0.0 {
                    0.0
                } else {
                    (spectral::power_iteration(&matrix, 1e-6, 1000) * 1.01).min(gersh)
                }
            }
        };
        Ok(LaplacianMatrix {
            kind,
            matrix,
            spectral_norm_bound,
        })
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    /// Upper bound on `‖L‖₂`: 2 for normalized Laplacians, a padded power
    /// iteration estimate otherwise, 0 for edgeless graphs.
    pub fn spectral_norm_bound(&self) -> f64 {
        self.spectral_norm_bound
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.size(), self.size());
        for (i, j, v) in self.matrix.triplet_iter() {
            out[(i, j)] += *v;
        }
        out
    }

    /// `L · X`
    pub fn apply_left(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        linalg::sparse_left(&self.matrix, x)
    }

    /// `X · L`
    pub fn apply_right(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        linalg::sparse_right(x, &self.matrix)
    }

    pub fn apply_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        linalg::sparse_matvec(&self.matrix, x)
    }

    /// `xᵀ L x`
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.apply_vec(x))
    }
}

fn degenerate_edge(e: &Edge) -> Error {
    Error::DegenerateGraph(format!(
        "edge ({}, {}) touches a vertex of degree 0",
        e.i, e.j
    ))
}

/// Degree-normalized graph gradient, one value per stored edge `(i, j)`, `i < j`:
/// `√W(i,j)·(s(j)/√d(j) − s(i)/√d(i))`.
///
/// `‖∇s‖² = sᵀ L_n s` for the normalized Laplacian `L_n`.
pub fn graph_gradient(g: &SparseGraph, s: &DVector<f64>) -> Result<DVector<f64>> {
    if s.len() != g.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} entries, graph has {} vertices",
            s.len(),
            g.num_vertices()
        )));
    }
    let d = g.degrees();
    if let Some(v) = (0..s.len()).find(|&v| d[v] == 0.0 && s[v] != 0.0) {
        return Err(Error::DegenerateGraph(format!(
            "vertex {v} has degree 0 but carries signal {}",
            s[v]
        )));
    }
    let mut out = DVector::zeros(g.num_edges());
    for (k, e) in g.edges().iter().enumerate() {
        if d[e.i] == 0.0 || d[e.j] == 0.0 {
            return Err(degenerate_edge(e));
        }
        out[k] = e.weight.sqrt() * (s[e.j] / d[e.j].sqrt() - s[e.i] / d[e.i].sqrt());
    }
    Ok(out)
}

/// Divergence, the adjoint of [`graph_gradient`]: `⟨∇s, c⟩ = ⟨s, ∇*c⟩`.
pub fn graph_divergence(g: &SparseGraph, c: &DVector<f64>) -> Result<DVector<f64>> {
    if c.len() != g.num_edges() {
        return Err(Error::DimensionMismatch(format!(
            "edge signal has {} entries, graph has {} edges",
            c.len(),
            g.num_edges()
        )));
    }
    let d = g.degrees();
    let mut out = DVector::zeros(g.num_vertices());
    for (k, e) in g.edges().iter().enumerate() {
        if d[e.i] == 0.0 || d[e.j] == 0.0 {
            return Err(degenerate_edge(e));
        }
        let sw = e.weight.sqrt();
        out[e.j] += sw * c[k] / d[e.j].sqrt();
        out[e.i] -= sw * c[k] / d[e.i].sqrt();
    }
    Ok(out)
}
