use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;
use crate::params::Params;

/// Record of one run. Feeding it back through `--config` replays the run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, params: &Params, seed: Option<u64>, outputs: Vec<String>, elapsed: Duration) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().collect(),
            inputs: params.inputs().clone(),
            outputs,
            params: params.resolved().clone(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: elapsed.as_secs_f64(),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
