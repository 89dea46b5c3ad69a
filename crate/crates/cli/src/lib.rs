//! Command-line experiments for disordered PST chains: config resolution,
//! CSV tables and run manifests.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod table;

use std::fs;
use std::io::Write;

pub use config::{resolve, ConfigFile, Experiment, Overrides, RunConfig};
pub use error::CliError;
pub use manifest::Manifest;
pub use table::ResultTable;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Where results go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sink {
    /// CSV files plus `manifest.json` in the configured directory.
    Directory,
    /// A single table on standard output with the manifest inlined.
    Stdout,
}

/// Runs the experiment and writes its outputs.
pub fn execute(cfg: &RunConfig, sink: Sink, quiet: bool) -> Result<Vec<String>, CliError> {
    let tables = experiments::run(cfg, experiments::Progress { quiet })?;
    let outputs: Vec<String> = tables.iter().map(|t| t.file_name.clone()).collect();
    let manifest = Manifest::for_run(cfg, outputs.clone());
    match sink {
        Sink::Stdout => {
            let [table] = tables.as_slice() else {
                return Err(CliError::Usage(format!(
                    "--stdout needs a single table, `{}` produced {}",
                    cfg.experiment,
                    tables.len()
                )));
            };
            let text = table.render(&manifest.to_line());
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
        Sink::Directory => {
            fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
            for table in &tables {
                let path = cfg.out.join(&table.file_name);
                fs::write(&path, table.render(MANIFEST_FILE))
                    .map_err(|e| CliError::io(&path, e))?;
            }
            let path = cfg.out.join(MANIFEST_FILE);
            fs::write(&path, manifest.to_pretty()).map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(outputs)
}
