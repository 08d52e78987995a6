//! CSV and JSON formats. Indices are 0-based; floats are written with 17
//! significant digits so that they read back bit-exactly.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{GsiError, Result};
use crate::experiments::{BenchmarkRow, Scenario};
use crate::graph::{Graph, PointCloud, Sensor, SensorTable};
use crate::interpolation::SampleSet;
use crate::spectral::SpectralBasis;

pub const GRAPH_HEADER: [&str; 3] = ["src", "dst", "weight"];
pub const SIGNAL_HEADER: [&str; 2] = ["index", "value"];
pub const SENSOR_HEADER: [&str; 4] = ["lon", "lat", "elev", "value"];
pub const EIGENVALUE_HEADER: [&str; 3] = ["index", "lambda_markov", "lambda_laplacian"];
pub const BENCHMARK_HEADER: [&str; 7] = ["method", "r", "trial", "error", "accuracy", "wall_ms", "status"];

/// Shortest round-trip-safe scientific notation: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_err(e: csv::Error) -> GsiError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => GsiError::Io(io.to_string()),
        other => GsiError::Parse {
            line,
            msg: format!("{other:?}"),
        },
    }
}

/// Reads a headed CSV, checking the header, and hands each record with its
/// 1-based line number to `f`.
fn read_rows<R: Read, F: FnMut(usize, &csv::StringRecord) -> Result<()>>(r: R, header: &[&str], mut f: F) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let got = rdr.headers().map_err(csv_err)?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(GsiError::Parse {
            line: 1,
            msg: format!("expected header '{}', found '{}'", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        });
    }
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        f(line, &rec)?;
    }
    Ok(())
}

fn field(rec: &csv::StringRecord, k: usize, line: usize) -> Result<&str> {
    rec.get(k).ok_or_else(|| GsiError::Parse {
        line,
        msg: format!("missing column {}", k + 1),
    })
}

fn parse_index(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| GsiError::Parse {
        line,
        msg: format!("'{s}' is not a node index"),
    })
}

fn parse_finite(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| GsiError::Parse {
        line,
        msg: format!("'{s}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(GsiError::Parse {
            line,
            msg: format!("non-finite value '{s}'"),
        });
    }
    Ok(v)
}

fn write_line<W: Write>(w: &mut W, fields: &[String]) -> Result<()> {
    writeln!(w, "{}", fields.join(","))?;
    Ok(())
}

/// Edge list `src,dst,weight`, one undirected edge per line. The node count
/// is `n` when given, otherwise one past the largest index.
pub fn read_graph_csv<R: Read>(r: R, n: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    read_rows(r, &GRAPH_HEADER, |line, rec| {
        let i = parse_index(field(rec, 0, line)?, line)?;
        let j = parse_index(field(rec, 1, line)?, line)?;
        let w = parse_finite(field(rec, 2, line)?, line)?;
        if i == j {
            return Err(GsiError::Parse {
                line,
                msg: format!("self loop at node {i}"),
            });
        }
        if w < 0.0 {
            return Err(GsiError::Parse {
                line,
                msg: format!("negative weight {w}"),
            });
        }
        edges.push((i, j, w));
        Ok(())
    })?;
    let max = edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    let n = match n {
        Some(n) if n < max => return Err(GsiError::IndexOutOfRange { index: max - 1, n }),
        Some(n) => n,
        None => max,
    };
    Graph::from_edges(n, &edges)
}

pub fn write_graph_csv<W: Write>(w: &mut W, g: &Graph) -> Result<()> {
    write_line(w, &GRAPH_HEADER.map(String::from))?;
    for (i, j, v) in g.edges() {
        write_line(w, &[i.to_string(), j.to_string(), fmt_f64(v)])?;
    }
    Ok(())
}

fn read_index_values<R: Read>(r: R) -> Result<Vec<(usize, f64, usize)>> {
    let mut out = Vec::new();
    read_rows(r, &SIGNAL_HEADER, |line, rec| {
        let i = parse_index(field(rec, 0, line)?, line)?;
        let v = parse_finite(field(rec, 1, line)?, line)?;
        out.push((i, v, line));
        Ok(())
    })?;
    Ok(out)
}

/// Signal `index,value` covering every node exactly once, in any order.
pub fn read_signal_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    let rows = read_index_values(r)?;
    let n = rows.len();
    let mut s = vec![None; n];
    for (i, v, line) in rows {
        if i >= n {
            return Err(GsiError::Parse {
                line,
                msg: format!("index {i} out of range for {n} rows"),
            });
        }
        if s[i].replace(v).is_some() {
            return Err(GsiError::Parse {
                line,
                msg: format!("index {i} repeated"),
            });
        }
    }
    Ok(s.into_iter().map(|v| v.expect("n distinct indices below n")).collect())
}

pub fn write_signal_csv<W: Write>(w: &mut W, s: &[f64]) -> Result<()> {
    write_line(w, &SIGNAL_HEADER.map(String::from))?;
    for (i, v) in s.iter().enumerate() {
        write_line(w, &[i.to_string(), fmt_f64(*v)])?;
    }
    Ok(())
}

/// Samples `index,value` in file order.
pub fn read_samples_csv<R: Read>(r: R) -> Result<SampleSet> {
    let rows = read_index_values(r)?;
    let mut seen = std::collections::HashSet::new();
    for &(i, _, line) in &rows {
        if !seen.insert(i) {
            return Err(GsiError::Parse {
                line,
                msg: format!("node {i} sampled twice"),
            });
        }
    }
    SampleSet::new(rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect())
}

pub fn write_samples_csv<W: Write>(w: &mut W, s: &SampleSet) -> Result<()> {
    write_line(w, &SIGNAL_HEADER.map(String::from))?;
    for (i, v) in s.indices().iter().zip(s.values()) {
        write_line(w, &[i.to_string(), fmt_f64(*v)])?;
    }
    Ok(())
}

/// Node list with header `index`; extra columns are ignored.
pub fn read_index_csv<R: Read>(r: R) -> Result<Vec<usize>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("index") {
        return Err(GsiError::Parse {
            line: 1,
            msg: "expected a first column named 'index'".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push(parse_index(field(&rec, 0, line)?, line)?);
    }
    Ok(out)
}

pub fn write_index_csv<W: Write>(w: &mut W, nodes: &[usize]) -> Result<()> {
    writeln!(w, "index")?;
    for i in nodes {
        writeln!(w, "{i}")?;
    }
    Ok(())
}

pub fn read_sensor_csv<R: Read>(r: R) -> Result<SensorTable> {
    let mut rows = Vec::new();
    read_rows(r, &SENSOR_HEADER, |line, rec| {
        let mut v = [0.0; 4];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = parse_finite(field(rec, k, line)?, line)?;
        }
        if !(-180.0..=180.0).contains(&v[0]) || !(-90.0..=90.0).contains(&v[1]) {
            return Err(GsiError::Parse {
                line,
                msg: format!("coordinates ({}, {}) out of range", v[0], v[1]),
            });
        }
        rows.push(Sensor {
            lon: v[0],
            lat: v[1],
            elev: v[2],
            value: v[3],
        });
        Ok(())
    })?;
    SensorTable::new(rows)
}

pub fn write_sensor_csv<W: Write>(w: &mut W, t: &SensorTable) -> Result<()> {
    write_line(w, &SENSOR_HEADER.map(String::from))?;
    for s in t.rows() {
        write_line(w, &[fmt_f64(s.lon), fmt_f64(s.lat), fmt_f64(s.elev), fmt_f64(s.value)])?;
    }
    Ok(())
}

/// Point coordinates with header `x0,x1,...`, one point per line.
pub fn read_points_csv<R: Read>(r: R) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let dim = header.len();
    if dim == 0 || header.iter().enumerate().any(|(k, h)| h != format!("x{k}")) {
        return Err(GsiError::Parse {
            line: 1,
            msg: "expected header 'x0,x1,...'".into(),
        });
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let p = (0..dim)
            .map(|k| parse_finite(field(&rec, k, line)?, line))
            .collect::<Result<Vec<f64>>>()?;
        points.push(p);
    }
    PointCloud::new(&points)
}

pub fn write_points_csv<W: Write>(w: &mut W, points: &PointCloud) -> Result<()> {
    let header: Vec<String> = (0..points.dim()).map(|k| format!("x{k}")).collect();
    write_line(w, &header)?;
    for i in 0..points.len() {
        write_line(w, &points.point(i).iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>())?;
    }
    Ok(())
}

/// `index,lambda_markov,lambda_laplacian`, leading eigenvalue first.
pub fn write_eigenvalues_csv<W: Write>(w: &mut W, markov: &DVector<f64>) -> Result<()> {
    write_line(w, &EIGENVALUE_HEADER.map(String::from))?;
    for (k, l) in markov.iter().enumerate() {
        write_line(w, &[k.to_string(), fmt_f64(*l), fmt_f64(1.0 - l)])?;
    }
    Ok(())
}

pub fn write_basis_eigenvalues_csv<W: Write>(w: &mut W, b: &SpectralBasis) -> Result<()> {
    write_eigenvalues_csv(w, b.eigenvalues())
}

/// Column-major eigenvector dump: line `k` holds column `k`.
pub fn write_eigenvectors_csv<W: Write>(w: &mut W, v: &DMatrix<f64>) -> Result<()> {
    let mut header = vec!["k".to_string()];
    header.extend((0..v.nrows()).map(|i| format!("node_{i}")));
    write_line(w, &header)?;
    for (k, col) in v.column_iter().enumerate() {
        let mut fields = vec![k.to_string()];
        fields.extend(col.iter().map(|x| fmt_f64(*x)));
        write_line(w, &fields)?;
    }
    Ok(())
}

pub fn read_scenario_json<R: Read>(r: R) -> Result<Scenario> {
    let sc: Scenario = serde_json::from_reader(r).map_err(|e| GsiError::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    sc.validate()?;
    Ok(sc)
}

pub fn write_scenario_json<W: Write>(w: &mut W, sc: &Scenario) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, sc).map_err(|e| GsiError::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn write_benchmark_csv<W: Write>(w: &mut W, rows: &[BenchmarkRow]) -> Result<()> {
    write_line(w, &BENCHMARK_HEADER.map(String::from))?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for row in rows {
        write_line(
            w,
            &[
                row.method.to_string(),
                row.r.to_string(),
                row.trial.to_string(),
                fmt_f64(row.error),
                opt(row.accuracy),
                opt(row.wall_ms),
                row.status.clone(),
            ],
        )?;
    }
    Ok(())
}
