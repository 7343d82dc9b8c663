//! CSV serialization of experiment reports.
//!
//! Layout: `#`-prefixed metadata lines (version, experiment tag, seed,
//! config hash, the full config as JSON, and the slope fit when present),
//! then a header row and one data row per grid point. Floats are written
//! with 17 significant digits so files round-trip bit-exactly, and nothing
//! time- or host-dependent is ever emitted: the same config and seed produce
//! byte-identical files on any machine and worker count.

use crate::experiment::{ExperimentConfig, ExperimentReport, SlopeFit};
use crate::{Error, Result};
use sha2::{Digest, Sha256};
use std::io::Write;

/// 17 significant digits; parses back to the identical f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// First 16 hex characters of the SHA-256 of the canonical config JSON.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Serialize a report to CSV bytes.
pub fn render_csv(report: &ExperimentReport) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(report, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Write a report as CSV.
pub fn write_csv<W: Write>(report: &ExperimentReport, mut w: W) -> Result<()> {
    let cfg = &report.config;
    writeln!(w, "# betakde v{}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# experiment={}", cfg.kind.tag())?;
    writeln!(w, "# seed={}", cfg.seed)?;
    writeln!(w, "# config_hash={}", config_hash(cfg))?;
    writeln!(
        w,
        "# config={}",
        serde_json::to_string(cfg).map_err(|e| Error::Report(e.to_string()))?
    )?;
    if let Some(s) = &report.slope {
        writeln!(w, "# slope={}", format_float(s.slope))?;
        writeln!(w, "# intercept={}", format_float(s.intercept))?;
        writeln!(w, "# slope_stderr={}", format_float(s.slope_stderr))?;
        writeln!(w, "# r_squared={}", format_float(s.r_squared))?;
    }
    writeln!(w, "{}", report.columns.join(","))?;
    for row in &report.rows {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// A parsed report file: the echoed config, the slope metadata if present,
/// and the data table.
#[derive(Debug, Clone)]
pub struct ParsedReport {
    pub config: ExperimentConfig,
    pub slope: Option<SlopeFit>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Parse CSV bytes produced by `write_csv`.
pub fn parse_csv(data: &str) -> Result<ParsedReport> {
    let mut config: Option<ExperimentConfig> = None;
    let mut columns: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut meta: std::collections::HashMap<String, String> = std::collections::HashMap::new();

    for line in data.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                if k == "config" {
                    config = Some(
                        serde_json::from_str(v)
                            .map_err(|e| Error::Report(format!("bad config json: {e}")))?,
                    );
                } else {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if columns.is_empty() {
            columns = line.split(',').map(|s| s.to_string()).collect();
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Report(format!("bad data row '{line}': {e}")))?);
    }

    let config = config.ok_or_else(|| Error::Report("missing '# config=' line".into()))?;
    let slope = match (
        meta.get("slope"),
        meta.get("intercept"),
        meta.get("slope_stderr"),
        meta.get("r_squared"),
    ) {
        (Some(s), Some(i), Some(se), Some(r2)) => Some(SlopeFit {
            slope: parse_f64(s)?,
            intercept: parse_f64(i)?,
            slope_stderr: parse_f64(se)?,
            r_squared: parse_f64(r2)?,
        }),
        _ => None,
    };
    if columns.is_empty() {
        return Err(Error::Report("missing header row".into()));
    }
    Ok(ParsedReport { config, slope, columns, rows })
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|e| Error::Report(format!("bad float '{s}': {e}")))
}
