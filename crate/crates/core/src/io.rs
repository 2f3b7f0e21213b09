//! Plain-text formats: headerless matrix CSV, graph edge lists and the CSV
//! series exported for plotting.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, with a dot separator regardless of locale.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{parse_err, Error, Result};
use crate::graph::SparseGraph;
use crate::solvers::SolverResult;
use crate::spectral::FilterSpec;

/// Shortest round-trip representation; exponent form outside `[1e−5, 1e16)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Reads a headerless CSV of numbers into a matrix, one CSV record per row.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(nrows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match ncols {
            None => ncols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_err(
                    line,
                    format!("expected {c} fields, found {}", record.len()),
                ))
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("field {} is not a number: '{field}'", col + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("field {} is not finite", col + 1)));
            }
            values.push(v);
        }
        nrows += 1;
    }
    let ncols = ncols.ok_or_else(|| parse_err(1, "empty matrix"))?;
    Ok(DMatrix::from_row_iterator(nrows, ncols, values))
}

pub fn read_matrix_csv_path(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_matrix_csv(File::open(path)?)
}

pub fn write_matrix_csv<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_csv_path(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    write_matrix_csv(BufWriter::new(File::create(path)?), m)
}

/// Reads an edge list: a `#vertices N` header, then one `i j w` line per
/// undirected edge (tab or space separated, 0-based vertices). Blank lines and
/// later `#` lines are ignored.
pub fn read_graph<R: BufRead>(reader: R) -> Result<SparseGraph> {
    let mut n = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let Some(n) = n else {
            let count = text
                .strip_prefix("#vertices")
                .ok_or_else(|| parse_err(line_no, "expected '#vertices N' header"))?
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, "vertex count is not a nonnegative integer"))?;
            if count == 0 {
                return Err(parse_err(line_no, "graph needs at least one vertex"));
            }
            n = Some(count);
            continue;
        };
        if text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(line_no, format!("expected 3 fields, found {}", fields.len())));
        }
        let vertex = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("'{s}' is not a vertex index")))
        };
        let (i, j) = (vertex(fields[0])?, vertex(fields[1])?);
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(line_no, format!("'{}' is not a weight", fields[2])))?;
        if i >= n || j >= n {
            return Err(parse_err(line_no, format!("vertex out of range for {n} vertices")));
        }
        if i == j {
            return Err(parse_err(line_no, format!("self-loop at vertex {i}")));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(parse_err(line_no, format!("invalid weight {w}")));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(parse_err(line_no, format!("duplicate edge ({i}, {j})")));
        }
        edges.push((i, j, w));
    }
    let n = n.ok_or_else(|| parse_err(1, "missing '#vertices N' header"))?;
    SparseGraph::from_edges(n, edges)
}

pub fn read_graph_path(path: impl AsRef<Path>) -> Result<SparseGraph> {
    read_graph(BufReader::new(File::open(path)?))
}

pub fn write_graph<W: Write>(mut w: W, g: &SparseGraph) -> Result<()> {
    writeln!(w, "#vertices {}", g.num_vertices())?;
    for e in g.edges() {
        writeln!(w, "{}\t{}\t{}", e.i, e.j, format_number(e.weight))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_graph_path(path: impl AsRef<Path>, g: &SparseGraph) -> Result<()> {
    write_graph(BufWriter::new(File::create(path)?), g)
}

/// `index,eigenvalue`
pub fn write_spectra_csv<W: Write>(mut w: W, eigenvalues: &[f64]) -> Result<()> {
    writeln!(w, "index,eigenvalue")?;
    for (i, v) in eigenvalues.iter().enumerate() {
        writeln!(w, "{i},{}", format_number(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// `x,g(x),f(x)` for the step penalty and its prox response on `points`
/// evenly spaced samples of `[0, x_max]`. Infinite penalties print as `inf`.
pub fn write_filter_curve_csv<W: Write>(
    mut w: W,
    b: f64,
    gamma: f64,
    x_max: f64,
    points: usize,
) -> Result<()> {
    let g = FilterSpec::StepGb { b };
    let f = FilterSpec::ProxFb { b, gamma };
    g.validate()?;
    f.validate()?;
    if points < 2 || !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::Parameter("curve needs ≥ 2 points on a positive range".into()));
    }
    writeln!(w, "x,g(x),f(x)")?;
    for i in 0..points {
        let x = x_max * i as f64 / (points - 1) as f64;
        writeln!(
            w,
            "{},{},{}",
            format_number(x),
            format_number(g.eval(x)),
            format_number(f.eval(x))
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `iter,objective,relative_change`, iterations counted from 1.
pub fn write_trace_csv<W: Write>(mut w: W, result: &SolverResult) -> Result<()> {
    writeln!(w, "iter,objective,relative_change")?;
    for (i, (o, c)) in result
        .objective_trace
        .iter()
        .zip(&result.relative_changes)
        .enumerate()
    {
        writeln!(w, "{},{},{}", i + 1, format_number(*o), format_number(*c))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 0.1, 1e-5, 9.99e-6, 1e16, 123456789.125, 1.0 / 3.0, -7e-300, 5e300] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(format_number(2e20), "2e20");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -0.25, 3e-9, 4.0, 5.5, 1.0 / 7.0]);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn matrix_errors_carry_line_numbers() {
        let err = read_matrix_csv("1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = read_matrix_csv("1,2\n3,4\n5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_matrix_csv("1,NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(read_matrix_csv("".as_bytes()).is_err());
    }

    #[test]
    fn matrix_tolerates_spaces() {
        let m = read_matrix_csv(" 1 , 2\n3,4 \n".as_bytes()).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn graph_round_trip() {
        let g = SparseGraph::from_edges(4, [(0, 1, 0.5), (3, 2, 1.25), (0, 3, 1e-8)]).unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#vertices 4\n0\t1\t0.5\n"));
        assert_eq!(read_graph(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn graph_errors() {
        let cases = [
            ("0 1 1\n", 1),
            ("#vertices 3\n0 1 1\n0 3 1\n", 3),
            ("#vertices 3\n0 1 1\n1 0 2\n", 3),
            ("#vertices 3\n\n1 1 1\n", 3),
            ("#vertices 3\n0 1 -1\n", 2),
            ("#vertices 3\n0 1\n", 2),
            ("#vertices 0\n", 1),
        ];
        for (text, line) in cases {
            match read_graph(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn filter_curve_has_header_and_points() {
        let mut buf = Vec::new();
        write_filter_curve_csv(&mut buf, 0.4, 1.0, 1.0, 1000).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1001);
        assert_eq!(lines[0], "x,g(x),f(x)");
        assert!(lines[1000].contains("inf"));
    }
}
