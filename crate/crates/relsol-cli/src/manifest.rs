//! Run manifest: one JSON file per output directory recording the resolved
//! configuration, the subcommand, extra resolved arguments, and the files
//! written. Field order is fixed by the struct, so apart from `timestamp`
//! the bytes are deterministic for identical runs.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    /// subcommand-specific resolved values (speed lists, check selections, ...)
    pub extra: BTreeMap<String, serde_json::Value>,
    /// files written this run, relative to the output directory
    pub outputs: Vec<String>,
    /// unix seconds; the one field excluded from byte determinism
    pub timestamp: u64,
}

pub fn write_manifest(
    cfg: &RunConfig,
    command: &str,
    extra: BTreeMap<String, serde_json::Value>,
    outputs: Vec<String>,
) -> relsol_core::Result<PathBuf> {
    let manifest = Manifest {
        schema_version: relsol_core::io::SCHEMA_VERSION,
        command: command.to_string(),
        config: cfg.clone(),
        extra,
        outputs,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let path = cfg.out.join("manifest.json");
    relsol_core::io::write_json_pretty(&path, &manifest)?;
    Ok(path)
}
