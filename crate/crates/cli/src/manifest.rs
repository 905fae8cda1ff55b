//! Run manifest: one JSON file per run that produced outputs, recording the
//! subcommand, its parameters, the tool version, wall-clock seconds, and a
//! digest of every written file.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use bratu_core::Result;

#[derive(Serialize)]
struct OutputRecord {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: &'static str,
    parameters: serde_json::Value,
    version: &'static str,
    wall_seconds: f64,
    outputs: Vec<OutputRecord>,
}

/// Writes `<first-output>.manifest.json` next to the first output file.
/// Runs that wrote nothing (stdout only) produce no manifest.
pub fn write_for(
    subcommand: &'static str,
    parameters: serde_json::Value,
    outputs: &[PathBuf],
    started: Instant,
) -> Result<()> {
    let Some(first) = outputs.first() else {
        return Ok(());
    };
    let records = outputs
        .iter()
        .map(|path| {
            let bytes = std::fs::read(path)?;
            Ok(OutputRecord {
                path: path.display().to_string(),
                sha256: hex_digest(&bytes),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        subcommand,
        parameters,
        version: env!("CARGO_PKG_VERSION"),
        wall_seconds: started.elapsed().as_secs_f64(),
        outputs: records,
    };
    let path = manifest_path(first);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    std::fs::write(path, json)?;
    Ok(())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
