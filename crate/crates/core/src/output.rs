//! CSV and manifest writers.
//!
//! Floats are written with `{:.16e}` (17 significant digits, `.` decimal
//! point, no grouping); every file ends with a newline.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::spectral::{CoefficientVector, SpectralSpace};
use crate::stepper::RunRecord;
use crate::verify::ConvergenceStudy;

/// Points at which the final solution is sampled.
pub const SOLUTION_POINTS: usize = 201;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `k,t,l2_norm,h1_norm,picard_iters,picard_residual`, one row per state.
pub fn trajectory_csv(record: &RunRecord) -> String {
    let mut out = String::from("k,t,l2_norm,h1_norm,picard_iters,picard_residual\n");
    for k in 0..record.trajectory.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            k,
            fmt_f64(record.times[k]),
            fmt_f64(record.l2_norms[k]),
            fmt_f64(record.h1_norms[k]),
            record.picard_iters[k],
            fmt_f64(record.picard_residuals[k]),
        ));
    }
    out
}

/// Uniform sample points `x_i = -1 + 2 i / (SOLUTION_POINTS - 1)`.
pub fn solution_points() -> Vec<f64> {
    let n = SOLUTION_POINTS - 1;
    (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect()
}

/// `x,u` at the uniform sample points.
pub fn solution_csv(space: &SpectralSpace, state: &CoefficientVector) -> String {
    let xs = solution_points();
    let us = space.synthesize(state, &xs);
    let mut out = String::from("x,u\n");
    for (x, u) in xs.iter().zip(&us) {
        out.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*u)));
    }
    out
}

/// `axis_value,error_h1,error_l2,error_h1_own,error_h1_standard,picard_iters`
/// followed by a `fitted_order` footer row.
///
/// `error_h1` uses the study's shared reference weight; `error_h1_own` uses
/// each run's own `α₀`.
pub fn study_csv(study: &ConvergenceStudy) -> String {
    let mut out =
        String::from("axis_value,error_h1,error_l2,error_h1_own,error_h1_standard,picard_iters\n");
    for (v, p) in study.values.iter().zip(&study.points) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(*v),
            fmt_f64(p.error_h1_ref),
            fmt_f64(p.error_l2),
            fmt_f64(p.error_h1),
            fmt_f64(p.error_h1_standard),
            p.max_picard_iters,
        ));
    }
    out.push_str(&format!(
        "fitted_order,{},,,,\n",
        fmt_f64(study.fitted_order)
    ));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub config_text: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub seed: Option<u64>,
    pub outputs: Vec<OutputEntry>,
    #[serde(default)]
    pub extra: serde_json::Value,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Internal(format!("{}: {e}", path.display()))
}

/// Write `files` (name, contents) into `dir`, then a `manifest.json` with
/// their checksums. Returns the manifest path.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    started_unix: u64,
    files: &[(&str, String)],
    extra: serde_json::Value,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut outputs = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config: serde_json::to_value(config)
            .map_err(|e| Error::Internal(format!("manifest serialization: {e}")))?,
        config_text: config.to_text(),
        started_unix,
        finished_unix: unix_now(),
        seed: None,
        outputs,
        extra,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Internal(format!("manifest serialization: {e}")))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Recompute each listed output's checksum. Returns the files that are
/// missing or no longer match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let manifest = read_manifest(dir)?;
    let mut bad = Vec::new();
    for entry in &manifest.outputs {
        match fs::read(dir.join(&entry.path)) {
            Ok(bytes) if sha256_hex(&bytes) == entry.sha256 => {}
            _ => bad.push(entry.path.clone()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_full_precision() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let v = 1.0 / 3.0;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn solution_grid() {
        let xs = solution_points();
        assert_eq!(xs.len(), 201);
        assert_eq!(xs[0], -1.0);
        assert_eq!(xs[200], 1.0);
        assert!((xs[100]).abs() < 1e-15);
    }
}
