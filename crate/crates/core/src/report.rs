//! Byte-stable rendering of numbers, traces and tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::corpus::corpus;
use crate::error::{Error, Result};
use crate::summability::ChainReport;

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Plain decimal rendering of `x` at 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{}", round12(x))
}

/// CSV with the given header and one line per row.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// `x,value` rows of an evaluation trace.
pub fn trace_csv(points: &[(f64, f64)]) -> String {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|&(x, v)| vec![fmt12(x), fmt12(v)])
        .collect();
    csv_table(&["x", "value"], &rows)
}

/// Aligned two-column text for an evaluation trace.
pub fn trace_text(points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for &(x, v) in points {
        let _ = writeln!(out, "{:>20}  {}", fmt12(x), fmt12(v));
    }
    out
}

/// Pretty JSON with a trailing newline.
pub(crate) fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct TracePoint {
    x: f64,
    value: f64,
}

/// JSON object naming the function and operator, with rounded points.
pub fn trace_json(function: &str, operator: &str, points: &[(f64, f64)]) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        function: &'a str,
        operator: &'a str,
        points: Vec<TracePoint>,
    }
    to_json(&Out {
        function,
        operator,
        points: points
            .iter()
            .map(|&(x, v)| TracePoint {
                x: round12(x),
                value: round12(v),
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct CorpusRow {
    label: String,
    domain: String,
    bound: f64,
    known: std::collections::BTreeMap<String, f64>,
}

fn corpus_rows() -> Vec<CorpusRow> {
    corpus()
        .into_iter()
        .map(|e| CorpusRow {
            label: e.label().to_string(),
            domain: e.domain().to_string(),
            bound: round12(e.function.bound()),
            known: e
                .known_values
                .iter()
                .map(|(k, v)| (k.clone(), round12(v.value)))
                .collect(),
        })
        .collect()
}

/// The corpus with its known values.
pub fn corpus_json() -> String {
    to_json(&corpus_rows())
}

/// `label,domain,bound,known` with known values as `name=value` joined by `;`.
pub fn corpus_csv() -> String {
    let rows: Vec<Vec<String>> = corpus_rows()
        .into_iter()
        .map(|r| {
            let known: Vec<String> = r
                .known
                .iter()
                .map(|(k, v)| format!("{k}={}", fmt12(*v)))
                .collect();
            vec![r.label, r.domain, fmt12(r.bound), known.join(";")]
        })
        .collect();
    csv_table(&["label", "domain", "bound", "known"], &rows)
}

pub fn corpus_text() -> String {
    let mut out = String::new();
    for r in corpus_rows() {
        let _ = writeln!(
            out,
            "{:<22} {:<15} bound {}",
            r.label,
            r.domain,
            fmt12(r.bound)
        );
        for (k, v) in &r.known {
            let _ = writeln!(out, "    {k:<12} {}", fmt12(*v));
        }
    }
    out
}

/// Writes `contents` to `path`, naming the path on failure.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Data that can be exported for plotting.
pub enum PlotData<'a> {
    /// An evaluation trace, written as `x,value`.
    Trace(&'a [(f64, f64)]),
    /// The tower of a chain report, written as `k,upper,lower`.
    Tower(&'a ChainReport),
}

/// Writes plot data as CSV with 12 significant digits.
pub fn export_plot_data(data: &PlotData<'_>, path: &Path) -> Result<()> {
    let csv = match data {
        PlotData::Trace(points) => trace_csv(points),
        PlotData::Tower(report) => report.tower_csv(),
    };
    write_file(path, &csv)
}
