//! CSV and JSON output.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use zakdd_core::waveform::TDSignal;

/// Nine significant digits; non-finite values as `nan`, `inf`, `-inf`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.8e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), fmt_float)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Data rows of a CSV written by [`write_csv`].
pub fn read_rows(path: &Path) -> anyhow::Result<Vec<Vec<String>>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.records().map(|rec| Ok(rec?.iter().map(String::from).collect())).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Columns `t, re, im`.
pub fn write_signal(path: &Path, s: &TDSignal) -> anyhow::Result<()> {
    let rows: Vec<Vec<String>> = s
        .samples
        .iter()
        .enumerate()
        .map(|(i, v)| vec![fmt_float(s.time(i)), fmt_float(v.re), fmt_float(v.im)])
        .collect();
    write_csv(path, &["t", "re", "im"], &rows)
}
