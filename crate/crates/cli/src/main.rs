mod commands;
mod error;
mod manifest;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lrmg::graph::{Axis, Metric, Sigma, Weighting};
use lrmg::solvers::FilteredSide;
use lrmg::synth::{ManifoldKind, NoisePlacement};
use lrmg::{LaplacianKind, Loss};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::params::Params;

/// Low-rank recovery of matrices on graphs.
///
/// Every parameter flag can also be set in a JSON object passed with
/// `--config`; flags take precedence. Each run writes a JSON manifest.
#[derive(Parser, Debug)]
#[command(name = "lrmg", version)]
struct Cli {
    /// JSON config with parameter values, or a manifest from an earlier run
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the run manifest (default: next to the outputs)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Graph construction
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Recover a low-rank matrix from noisy data
    Solve(SolveArgs),
    /// Alignment, spectral gaps, singular values and coherence of a matrix
    Diagnose(DiagnoseArgs),
    /// Synthetic data
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Eigenvalues and filter curves for plotting
    #[command(subcommand)]
    Spectra(SpectraCommand),
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// KNN graph on the rows or columns of a matrix CSV
    Build(GraphBuildArgs),
}

#[derive(Args, Debug)]
pub struct GraphBuildArgs {
    #[arg(long)]
    input: Option<String>,
    /// rows (feature graph) or columns (sample graph)
    #[arg(long)]
    axis: Option<Axis>,
    #[arg(long)]
    k: Option<usize>,
    /// gaussian, binary or correlation
    #[arg(long)]
    weighting: Option<Weighting>,
    /// Gaussian kernel width, or `auto`
    #[arg(long)]
    sigma: Option<Sigma>,
    /// euclidean or manhattan
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Noisy data matrix CSV (rows are features, columns samples)
    #[arg(long)]
    input: Option<String>,
    /// Feature graph file; omitted means no row regularization
    #[arg(long)]
    row_graph: Option<String>,
    /// Sample graph file; omitted means no column regularization
    #[arg(long)]
    col_graph: Option<String>,
    /// frpcag, gfrpcag or tikhonov
    #[arg(long)]
    algo: Option<commands::solve::Algo>,
    #[arg(long)]
    gamma_r: Option<f64>,
    #[arg(long)]
    gamma_c: Option<f64>,
    /// l1, l2 or l21
    #[arg(long)]
    loss: Option<Loss>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// normalized or unnormalized
    #[arg(long)]
    laplacian: Option<LaplacianKind>,
    /// Filter band edge for gfrpcag
    #[arg(long)]
    b: Option<f64>,
    /// Which graph gfrpcag filters: row or column
    #[arg(long)]
    filtered_side: Option<FilteredSide>,
    /// Use a Chebyshev approximation of this order instead of a full eigendecomposition
    #[arg(long)]
    chebyshev_order: Option<usize>,
    #[arg(long)]
    out_dir: Option<String>,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// Matrix to analyse (data or a recovered matrix)
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    row_graph: Option<String>,
    #[arg(long)]
    col_graph: Option<String>,
    #[arg(long)]
    k_r: Option<usize>,
    #[arg(long)]
    k_c: Option<usize>,
    #[arg(long)]
    laplacian: Option<LaplacianKind>,
    /// Clean matrix; with --noisy, --gamma and --loss, checks the error bound for the input
    #[arg(long)]
    clean: Option<String>,
    #[arg(long)]
    noisy: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    loss: Option<Loss>,
    #[arg(long)]
    out_dir: Option<String>,
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    /// Matrix that is low-rank on random KNN graphs, with the graphs
    Lowrank(LowrankArgs),
    /// Add noise to a matrix
    Noise(NoiseArgs),
    /// Points sampled from a curve or surface
    Manifold(ManifoldArgs),
}

#[derive(Args, Debug)]
pub struct LowrankArgs {
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k_r: Option<usize>,
    #[arg(long)]
    k_c: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<String>,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    #[arg(long)]
    input: Option<String>,
    /// gaussian, sparse or column-outliers
    #[arg(long)]
    model: Option<commands::synth::NoiseKind>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
pub struct ManifoldArgs {
    /// circle2d, spiral2d or swissroll3d
    #[arg(long)]
    kind: Option<ManifoldKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// ambient or extra_dim
    #[arg(long)]
    placement: Option<NoisePlacement>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand, Debug)]
enum SpectraCommand {
    /// Laplacian eigenvalues of a graph file
    Eigen(EigenArgs),
    /// Sampled step penalty and prox response curves
    Filter(FilterArgs),
}

#[derive(Args, Debug)]
pub struct EigenArgs {
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    laplacian: Option<LaplacianKind>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

/// What a command produced, for the manifest.
pub struct Outcome {
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub default_manifest: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let mut params = Params::load(cli.config.as_deref())?;
    let (name, outcome) = match cli.command {
        Command::Graph(GraphCommand::Build(a)) => ("graph build", commands::graph::build(a, &mut params)?),
        Command::Solve(a) => ("solve", commands::solve::run(a, &mut params)?),
        Command::Diagnose(a) => ("diagnose", commands::diagnose::run(a, &mut params)?),
        Command::Synth(SynthCommand::Lowrank(a)) => ("synth lowrank", commands::synth::lowrank(a, &mut params)?),
        Command::Synth(SynthCommand::Noise(a)) => ("synth noise", commands::synth::noise(a, &mut params)?),
        Command::Synth(SynthCommand::Manifold(a)) => ("synth manifold", commands::synth::manifold(a, &mut params)?),
        Command::Spectra(SpectraCommand::Eigen(a)) => ("spectra eigen", commands::spectra::eigen(a, &mut params)?),
        Command::Spectra(SpectraCommand::Filter(a)) => ("spectra filter", commands::spectra::filter(a, &mut params)?),
    };
    let path = cli.manifest.unwrap_or(outcome.default_manifest);
    RunManifest::new(name, &params, outcome.seed, outcome.outputs, start.elapsed()).write(&path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
