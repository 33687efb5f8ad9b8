use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, CliResult};

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub subcommand: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub unix_time: u64,
    pub config: &'a RunConfig,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl<'a> Manifest<'a> {
    pub fn new(subcommand: &'static str, config: &'a RunConfig) -> Self {
        Self {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed(),
            unix_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(mut self, out_dir: &Path) -> CliResult<()> {
        let path = out_dir.join(format!("{}.manifest.json", self.subcommand));
        self.outputs.push(path.clone());
        let json = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Usage(format!("cannot serialize manifest: {e}")))?;
        write_file(&path, &json)
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}
