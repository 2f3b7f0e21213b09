use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lrmg::io::{read_graph_path, read_matrix_csv_path};

fn lrmg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrmg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = lrmg(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn rel(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Clean low-rank matrix with its graphs in `s/`, plus `noisy.csv`.
fn synthetic(dir: &Path) {
    ok(dir, &["synth", "lowrank", "--p", "30", "--n", "25", "--k-r", "3", "--k-c", "3", "--seed", "5", "--out-dir", "s"]);
    ok(dir, &["synth", "noise", "--input", "s/clean.csv", "--model", "gaussian", "--sigma", "0.01", "--seed", "6", "--out", "noisy.csv"]);
}

#[test]
fn collinear_points_give_a_path_and_rebuilds_are_identical() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("m.csv"), "0,1,2\n").unwrap();
    let args = ["graph", "build", "--input", "m.csv", "--k", "1", "--weighting", "binary", "--out", "a.graph"];
    ok(t.path(), &args);
    let g = read_graph_path(t.path().join("a.graph")).unwrap();
    let edges: Vec<_> = g.edges().iter().map(|e| (e.i, e.j, e.weight)).collect();
    assert_eq!(edges, vec![(0, 1, 1.0), (1, 2, 1.0)]);
    let first = fs::read(t.path().join("a.graph")).unwrap();
    ok(t.path(), &args);
    assert_eq!(fs::read(t.path().join("a.graph")).unwrap(), first);
    assert!(t.path().join("a.graph.manifest.json").exists());
}

#[test]
fn spiral_graph_is_connected() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["synth", "manifold", "--kind", "spiral2d", "--n", "500", "--seed", "1", "--out", "sp.csv"]);
    ok(t.path(), &["graph", "build", "--input", "sp.csv", "--k", "10", "--out", "sp.graph"]);
    assert_eq!(read_graph_path(t.path().join("sp.graph")).unwrap().connected_components(), 1);
}

#[test]
fn zero_gamma_returns_the_input() {
    let t = tempfile::tempdir().unwrap();
    synthetic(t.path());
    ok(t.path(), &[
        "solve", "--input", "noisy.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
        "--gamma-r", "0", "--gamma-c", "0", "--out-dir", "r",
    ]);
    let x = read_matrix_csv_path(t.path().join("r/x.csv")).unwrap();
    assert_eq!(x, read_matrix_csv_path(t.path().join("noisy.csv")).unwrap());
}

#[test]
fn tikhonov_matches_l2_solver_with_one_graph_active() {
    let t = tempfile::tempdir().unwrap();
    synthetic(t.path());
    for (gr, gc) in [("0", "2"), ("2", "0")] {
        for algo in ["tikhonov", "frpcag"] {
            ok(t.path(), &[
                "solve", "--input", "noisy.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
                "--algo", algo, "--loss", "l2", "--gamma-r", gr, "--gamma-c", gc,
                "--tolerance", "1e-14", "--max-iters", "20000", "--out-dir", algo,
            ]);
        }
        let a = read_matrix_csv_path(t.path().join("tikhonov/x.csv")).unwrap();
        let b = read_matrix_csv_path(t.path().join("frpcag/x.csv")).unwrap();
        assert!(rel(&b, &a) <= 1e-4, "gamma_r={gr} gamma_c={gc}: {}", rel(&b, &a));
    }
}

#[test]
fn pipeline_bound_holds() {
    let t = tempfile::tempdir().unwrap();
    synthetic(t.path());
    ok(t.path(), &[
        "solve", "--input", "noisy.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
        "--loss", "l1", "--gamma-r", "1", "--gamma-c", "1", "--tolerance", "1e-10", "--max-iters", "5000", "--out-dir", "r",
    ]);
    // diagnose recomputes the bound with γ-scaled weights, so solve again with those
    ok(t.path(), &[
        "diagnose", "--input", "r/x.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
        "--k-r", "3", "--k-c", "3", "--out-dir", "d0",
    ]);
    let text = fs::read_to_string(t.path().join("d0/diagnostics.txt")).unwrap();
    let gap = |key: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(key)).unwrap().trim().parse().unwrap()
    };
    assert!(gap("spectral_gap_c:") < 1.0 && gap("spectral_gap_r:") < 1.0);

    let eig = |graph: &str| -> Vec<f64> {
        let g = read_graph_path(t.path().join(graph)).unwrap();
        let l = lrmg::graph::laplacian(&g, lrmg::LaplacianKind::Normalized);
        lrmg::spectral::eigendecompose(&l, None).unwrap().eigenvalues().to_vec()
    };
    let (gr, gc) = (1.0 / eig("s/row.graph")[3], 1.0 / eig("s/col.graph")[3]);
    ok(t.path(), &[
        "solve", "--input", "noisy.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
        "--loss", "l1", "--gamma-r", &gr.to_string(), "--gamma-c", &gc.to_string(),
        "--tolerance", "1e-12", "--max-iters", "20000", "--out-dir", "r2",
    ]);
    ok(t.path(), &[
        "diagnose", "--input", "r2/x.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
        "--k-r", "3", "--k-c", "3", "--clean", "s/clean.csv", "--noisy", "noisy.csv",
        "--gamma", "1", "--loss", "l1", "--out-dir", "d",
    ]);
    let report = fs::read_to_string(t.path().join("d/diagnostics.txt")).unwrap();
    assert!(report.contains("bound_holds: true"), "{report}");
    for f in ["alignment_rows.txt", "gamma_cols_20log10.csv", "singular_values.csv", "coherence_vtq.csv"] {
        assert!(t.path().join("d").join(f).exists(), "{f}");
    }
}

#[test]
fn shape_mismatch_is_a_data_error_naming_the_dimension() {
    let t = tempfile::tempdir().unwrap();
    synthetic(t.path());
    let out = lrmg(t.path(), &["solve", "--input", "noisy.csv", "--row-graph", "s/col.graph", "--out-dir", "r"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("p (rows) = 30"));
}

#[test]
fn malformed_csv_reports_its_line() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("m.csv"), "1,2\n3,x\n").unwrap();
    let out = lrmg(t.path(), &["graph", "build", "--input", "m.csv", "--k", "1", "--out", "g"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_2() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("m.csv"), "0,1,2\n").unwrap();
    assert_eq!(code(&lrmg(t.path(), &["solve", "--algo", "nope"])), 2);
    assert_eq!(code(&lrmg(t.path(), &["graph", "build", "--input", "m.csv"])), 2);
    assert_eq!(code(&lrmg(t.path(), &["graph", "build", "--input", "m.csv", "--k", "5", "--out", "g"])), 2);
    assert_eq!(code(&lrmg(t.path(), &["spectra", "filter", "--b", "-1", "--out", "f.csv"])), 2);
    fs::write(t.path().join("bad.json"), "{not json").unwrap();
    assert_eq!(code(&lrmg(t.path(), &["--config", "bad.json", "spectra", "filter", "--b", "1", "--out", "f.csv"])), 2);
}

#[test]
fn non_convergence_still_succeeds_with_a_flag() {
    let t = tempfile::tempdir().unwrap();
    synthetic(t.path());
    ok(t.path(), &[
        "solve", "--input", "noisy.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
        "--loss", "l2", "--max-iters", "2", "--tolerance", "1e-15", "--out-dir", "r",
    ]);
    let report = fs::read_to_string(t.path().join("r/report.txt")).unwrap();
    assert!(report.contains("converged: false"));
    assert_eq!(fs::read_to_string(t.path().join("r/trace.csv")).unwrap().lines().count(), 3);
}

#[test]
fn filtered_solver_runs_on_either_side() {
    let t = tempfile::tempdir().unwrap();
    synthetic(t.path());
    for (side, cheb) in [("column", None), ("row", Some("30"))] {
        let mut args = vec![
            "solve", "--input", "noisy.csv", "--row-graph", "s/row.graph", "--col-graph", "s/col.graph",
            "--algo", "gfrpcag", "--b", "0.3", "--loss", "l2", "--filtered-side", side, "--out-dir", side,
        ];
        if let Some(order) = cheb {
            args.extend(["--chebyshev-order", order]);
        }
        ok(t.path(), &args);
        let x = read_matrix_csv_path(t.path().join(side).join("x.csv")).unwrap();
        assert_eq!(x.shape(), (30, 25));
        assert!(x.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn flags_override_config_and_manifest_replays() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("cfg.json"), r#"{"kind": "circle2d", "n": 40, "sigma": 0.1, "seed": 3, "out": "a.csv"}"#).unwrap();
    ok(t.path(), &["--config", "cfg.json", "synth", "manifold", "--n", "50"]);
    let a = read_matrix_csv_path(t.path().join("a.csv")).unwrap();
    assert_eq!(a.shape(), (2, 50));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "synth manifold");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["params"]["n"], 50);
    assert_eq!(manifest["params"]["placement"], "ambient");

    let first = fs::read(t.path().join("a.csv")).unwrap();
    fs::remove_file(t.path().join("a.csv")).unwrap();
    ok(t.path(), &["--config", "a.csv.manifest.json", "synth", "manifold", "--manifest", "replay.json"]);
    assert_eq!(fs::read(t.path().join("a.csv")).unwrap(), first);
}

#[test]
fn synthesis_is_byte_identical_per_seed() {
    let t = tempfile::tempdir().unwrap();
    for dir in ["one", "two"] {
        ok(t.path(), &["synth", "lowrank", "--p", "20", "--n", "15", "--k-r", "2", "--k-c", "2", "--seed", "9", "--out-dir", dir]);
    }
    for f in ["clean.csv", "coeffs.csv", "row.graph", "col.graph"] {
        assert_eq!(
            fs::read(t.path().join("one").join(f)).unwrap(),
            fs::read(t.path().join("two").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn spectra_exports() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("p.graph"), "#vertices 4\n0\t1\t1\n1\t2\t1\n2\t3\t1\n").unwrap();
    ok(t.path(), &["spectra", "eigen", "--graph", "p.graph", "--laplacian", "unnormalized", "--out", "e.csv"]);
    let text = fs::read_to_string(t.path().join("e.csv")).unwrap();
    let vals: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (k, v) in vals.iter().enumerate() {
        let expect = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 4.0).cos();
        assert!((v - expect).abs() < 1e-12);
    }
    ok(t.path(), &["spectra", "filter", "--b", "0.5", "--gamma", "1", "--points", "11", "--out", "f.csv"]);
    assert_eq!(fs::read_to_string(t.path().join("f.csv")).unwrap().lines().count(), 12);
}
