use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use lrmg::io::{format_number, write_trace_csv};
use lrmg::solvers::{solve_frpcag, solve_gfrpcag, tikhonov_closed_form, FilteredSide};
use lrmg::{FilterSpec, LaplacianKind, SolverConfig, SolverResult, StopReason};

use super::{load_laplacian, out_dir, read_matrix, write_matrix};
use crate::error::{with_path, CliError, CliResult};
use crate::params::Params;
use crate::{Outcome, SolveArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Frpcag,
    Gfrpcag,
    Tikhonov,
}

impl FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "frpcag" => Ok(Algo::Frpcag),
            "gfrpcag" => Ok(Algo::Gfrpcag),
            "tikhonov" => Ok(Algo::Tikhonov),
            other => Err(format!("unknown algorithm `{other}` (frpcag, gfrpcag, tikhonov)")),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Frpcag => "frpcag",
            Algo::Gfrpcag => "gfrpcag",
            Algo::Tikhonov => "tikhonov",
        })
    }
}

pub fn run(a: SolveArgs, p: &mut Params) -> CliResult<Outcome> {
    let input = p.input("input", a.input)?;
    let row_graph = p.optional_input("row_graph", a.row_graph)?;
    let col_graph = p.optional_input("col_graph", a.col_graph)?;
    let algo = p.get("algo", a.algo, Some(Algo::Frpcag))?;
    let defaults = SolverConfig::default();
    let gamma_r = p.get("gamma_r", a.gamma_r, Some(defaults.gamma_r))?;
    let gamma_c = p.get("gamma_c", a.gamma_c, Some(defaults.gamma_c))?;
    let kind = p.get("laplacian", a.laplacian, Some(LaplacianKind::Normalized))?;
    let dir = p.get::<String>("out_dir", a.out_dir, None)?;

    let y = read_matrix(&input)?;
    let lr = load_laplacian(row_graph.as_deref(), y.nrows(), "p (rows)", kind)?;
    let lc = load_laplacian(col_graph.as_deref(), y.ncols(), "n (columns)", kind)?;

    let result = if algo == Algo::Tikhonov {
        SolverResult {
            x: tikhonov_closed_form(&y, &lr, &lc, gamma_r, gamma_c)?,
            iterations: 0,
            objective_trace: Vec::new(),
            relative_changes: Vec::new(),
            converged: true,
            stop_reason: StopReason::Converged,
        }
    } else {
        let loss = p.get("loss", a.loss, Some(defaults.loss))?;
        let max_iters = p.get("max_iters", a.max_iters, Some(defaults.max_iters))?;
        let tolerance = p.get("tolerance", a.tolerance, Some(defaults.tolerance))?;
        let config = SolverConfig::new(gamma_r, gamma_c, loss).with_tolerance(tolerance, max_iters);
        if algo == Algo::Frpcag {
            solve_frpcag(&y, &lr, &lc, &config)?
        } else {
            let b = p.get("b", a.b, None)?;
            let side = p.get("filtered_side", a.filtered_side, Some(FilteredSide::Column))?;
            let mut config = config.with_filter(FilterSpec::StepGb { b }, side);
            config.chebyshev_order = p.optional("chebyshev_order", a.chebyshev_order)?;
            match side {
                FilteredSide::Column => solve_gfrpcag(&y, &lr, &lc, &config)?,
                FilteredSide::Row => solve_gfrpcag(&y, &lc, &lr, &config)?,
            }
        }
    };

    let dir = out_dir(&dir)?;
    let x_path = write_matrix(&dir.join("x.csv"), &result.x)?;
    let trace_path = dir.join("trace.csv").display().to_string();
    let file = std::fs::File::create(&trace_path).map_err(CliError::Io)?;
    with_path(&trace_path, write_trace_csv(std::io::BufWriter::new(file), &result))?;
    let report_path = dir.join("report.txt").display().to_string();
    std::fs::write(&report_path, report(algo, &result))?;
    Ok(Outcome {
        default_manifest: dir.join("manifest.json"),
        outputs: vec![x_path, trace_path, report_path],
        seed: None,
    })
}

fn report(algo: Algo, r: &SolverResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "algorithm: {algo}");
    let _ = writeln!(s, "shape: {}x{}", r.x.nrows(), r.x.ncols());
    let _ = writeln!(s, "iterations: {}", r.iterations);
    let _ = writeln!(s, "converged: {}", r.converged);
    let _ = writeln!(s, "stop_reason: {}", r.stop_reason);
    if let Some(o) = r.objective_trace.last() {
        let _ = writeln!(s, "final_objective: {}", format_number(*o));
    }
    if let Some(c) = r.relative_changes.last() {
        let _ = writeln!(s, "final_relative_change: {}", format_number(*c));
    }
    s
}

