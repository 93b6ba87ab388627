//! Report envelope assembly and file output.

use std::path::{Path, PathBuf};

use prs_core::report::{flatten_scalars, to_json_17};
use serde::Serialize;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PRS_LAB_OUT";

/// Provenance and timing; everything here is excluded from determinism
/// comparisons.
#[derive(Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub revision: &'static str,
    pub started_utc: String,
    pub finished_utc: String,
    pub duration_ms: f64,
}

/// The full report envelope written to disk and stdout.
#[derive(Serialize)]
pub struct RunReport {
    pub meta: Meta,
    pub config: serde_json::Value,
    pub payload: serde_json::Value,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        to_json_17(&serde_json::to_value(self).expect("report serializes"))
    }

    /// Flat `key,value` projection of the config and payload scalars.
    pub fn to_csv(&self) -> String {
        let mut rows = vec![("key".to_string(), "value".to_string())];
        flatten_scalars(&self.config, "config", &mut rows);
        flatten_scalars(&self.payload, "payload", &mut rows);
        rows.iter()
            .map(|(k, v)| format!("{},{}", csv_escape(k), csv_escape(v)))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Resolve the output path: explicit `--out`, or the default directory from
/// the environment (falling back to the working directory).
pub fn resolve_out_path(
    out: Option<&Path>,
    subcommand: &str,
    seed: u64,
    format: &str,
) -> PathBuf {
    match out {
        Some(path) => path.to_path_buf(),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{subcommand}_seed{seed}.{format}"))
        }
    }
}
