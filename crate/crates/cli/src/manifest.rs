use std::ffi::OsString;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::Report;
use crate::error::CliError;

/// Sidecar describing how an output file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Full command line, program name first; `yule rerun` replays it.
    pub argv: Vec<String>,
    pub parameters: Value,
    pub seed: Option<u64>,
    /// UTC, RFC 3339.
    pub timestamp: String,
    pub routes: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(argv: &[OsString], report: &Report, outputs: Vec<String>) -> Self {
        RunManifest {
            tool: "yule".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: report.command.into(),
            argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            parameters: report.parameters.clone(),
            seed: report.seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            routes: report.routes.iter().map(|r| r.to_string()).collect(),
            outputs,
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::Manifest(e.to_string()))?;
        if m.argv.len() < 2 || m.command == "rerun" {
            return Err(CliError::Manifest("argv does not name a runnable command".into()));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("manifest fields always serialize")
    }
}
