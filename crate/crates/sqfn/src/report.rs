//! Deterministic CSV and JSON renderings of ratio reports.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use sqfn_core::verifier::RatioReport;

use crate::error::{CliError, Result};
use crate::io::write_text;

pub const CSV_COLUMNS: [&str; 10] = [
    "theorem",
    "label",
    "lhs",
    "rhs",
    "ratio",
    "maximizers",
    "flags",
    "extras",
    "fingerprint",
    "fingerprint_sha256",
];

/// Shortest decimal that reads back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Serialize)]
struct Record<'a> {
    theorem: &'a str,
    label: &'a str,
    lhs: f64,
    rhs: f64,
    ratio: Option<f64>,
    maximizers: &'a [usize],
    flags: &'a [String],
    extras: serde_json::Map<String, serde_json::Value>,
    fingerprint: &'a str,
    fingerprint_sha256: String,
}

fn record(r: &RatioReport) -> Record<'_> {
    Record {
        theorem: r.theorem.as_str(),
        label: &r.label,
        lhs: r.lhs,
        rhs: r.rhs,
        ratio: r.ratio,
        maximizers: &r.maximizers,
        flags: &r.flags,
        extras: r
            .extras
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect(),
        fingerprint: &r.fingerprint,
        fingerprint_sha256: sha256_hex(&r.fingerprint),
    }
}

pub fn render_csv(reports: &[RatioReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        let join = |v: Vec<String>, sep: &str| v.join(sep);
        w.write_record([
            r.theorem.as_str().to_string(),
            r.label.clone(),
            float(r.lhs),
            float(r.rhs),
            r.ratio.map(float).unwrap_or_default(),
            join(r.maximizers.iter().map(|m| m.to_string()).collect(), " "),
            join(r.flags.clone(), ";"),
            join(
                r.extras
                    .iter()
                    .map(|(k, v)| format!("{k}={}", float(*v)))
                    .collect(),
                ";",
            ),
            r.fingerprint.clone(),
            sha256_hex(&r.fingerprint),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_json(reports: &[RatioReport]) -> Result<String> {
    let records: Vec<Record<'_>> = reports.iter().map(record).collect();
    let mut s = serde_json::to_string_pretty(&records)?;
    s.push('\n');
    Ok(s)
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`.
pub fn emit_report(reports: &[RatioReport], dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_text(&csv_path, &render_csv(reports)?)?;
    write_text(&json_path, &render_json(reports)?)?;
    Ok((csv_path, json_path))
}
