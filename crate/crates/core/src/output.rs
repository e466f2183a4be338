//! Deterministic CSV and JSON emission.
//!
//! Floats are written with 17 significant digits, so values round-trip
//! exactly and identical inputs give byte-identical files.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;

pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_COLUMNS: [&str; 8] = ["t", "l1", "lq", "l2", "linf", "h1dot", "ut_l2", "blowup"];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Data(format!("csv encoding failed: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Data(format!("csv encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

/// Rows of already-formatted cells under a header.
pub fn table_csv<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(csv_error)?;
    }
    finish(w)
}

/// Trace table with columns [`TRACE_COLUMNS`]. Channels a trace lacks are
/// empty cells. Non-finite values are rejected except on a terminal blow-up row.
pub fn trace_csv(trace: &EvolutionTrace) -> Result<String> {
    let last = trace.times.len().saturating_sub(1);
    let mut rows = Vec::with_capacity(trace.times.len());
    for (i, (t, r)) in trace.times.iter().zip(&trace.norms).enumerate() {
        let blowup_row = trace.blowup.is_some() && i == last;
        if !blowup_row && !(t.is_finite() && r.is_finite()) {
            return Err(Error::Data(format!("non-finite trace value at t = {t}")));
        }
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        rows.push(vec![
            format_float(*t),
            format_float(r.l1),
            format_float(r.lq),
            format_float(r.l2),
            format_float(r.linf),
            opt(r.h1dot),
            opt(r.ut_l2),
            if blowup_row { "1" } else { "0" }.to_string(),
        ]);
    }
    table_csv(&TRACE_COLUMNS, rows)
}

/// Snapshot matrix: one row per stored time, `t` followed by the samples.
pub fn snapshots_csv(trace: &EvolutionTrace) -> Result<String> {
    let n = trace.snapshots.first().map_or(0, |s| s.u.len());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|j| format!("u{j}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = trace.snapshots.iter().map(|s| {
        std::iter::once(format_float(s.time))
            .chain(s.u.samples().iter().map(|&v| format_float(v)))
            .collect::<Vec<_>>()
    });
    table_csv(&header_refs, rows)
}

fn find_null(v: &Value, path: &mut Vec<String>) -> Option<String> {
    match v {
        Value::Null => Some(path.join(".")),
        Value::Array(items) => items.iter().enumerate().find_map(|(i, x)| {
            path.push(i.to_string());
            let r = find_null(x, path);
            path.pop();
            r
        }),
        Value::Object(map) => map.iter().find_map(|(k, x)| {
            path.push(k.clone());
            let r = find_null(x, path);
            path.pop();
            r
        }),
        _ => None,
    }
}

/// Pretty JSON with a leading `schema_version`. Any non-finite number
/// (which serializes as `null`) is an error naming its path.
pub fn report_json(report: &impl Serialize) -> Result<String> {
    let body = serde_json::to_value(report)?;
    if let Some(path) = find_null(&body, &mut Vec::new()) {
        return Err(Error::Data(format!("non-finite value in report at `{path}`")));
    }
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("report".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map))?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
