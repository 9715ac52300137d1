//! Run manifests: a JSON record of what was run, with what resolved
//! configuration, and checksums of everything written. Feeding a
//! manifest back through `--config` replays the run from its embedded
//! snapshot and must reproduce the data files byte for byte.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result, bail};
use serde::{Deserialize, Serialize, de::DeserializeOwned};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    /// File name relative to the manifest's directory.
    pub file: String,
    /// Lowercase hex SHA-256 of the file contents.
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest<T> {
    pub artifact_version: String,
    pub subcommand: String,
    pub master_seed: u64,
    /// Fully resolved run request; replays use this verbatim.
    pub resolved: T,
    /// The modeling choices this run was made under, spelled out so a
    /// data file never travels without them.
    pub notes: Vec<String>,
    pub outputs: Vec<OutputRecord>,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Collects output files as they are written and emits the manifest
/// last, so a manifest only ever describes files that exist.
pub struct OutputCollector {
    dir: PathBuf,
    outputs: Vec<OutputRecord>,
}

impl OutputCollector {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputCollector { dir: dir.to_path_buf(), outputs: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(OutputRecord { file: name.to_string(), sha256: sha256_hex(contents) });
        Ok(path)
    }

    pub fn finish<T: Serialize>(
        mut self,
        subcommand: &str,
        master_seed: u64,
        resolved: T,
        notes: Vec<String>,
        duration_seconds: f64,
    ) -> Result<PathBuf> {
        let manifest = Manifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            master_seed,
            resolved,
            notes,
            outputs: std::mem::take(&mut self.outputs),
            duration_seconds,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// True when the file looks like a manifest rather than a TOML config.
pub fn is_manifest(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// Load the resolved snapshot back out of a manifest for a replay,
/// refusing manifests written by a different subcommand.
pub fn load_resolved<T: DeserializeOwned>(path: &Path, subcommand: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    // check the tag before the typed payload, so a mismatched manifest
    // reports the wrong subcommand rather than a missing field
    #[derive(Deserialize)]
    struct Probe {
        subcommand: String,
    }
    let probe: Probe = serde_json::from_str(&text)
        .with_context(|| format!("parsing manifest {}", path.display()))?;
    if probe.subcommand != subcommand {
        bail!(
            "manifest {} was written by `{}`, not `{subcommand}`",
            path.display(),
            probe.subcommand
        );
    }
    let manifest: Manifest<T> = serde_json::from_str(&text)
        .with_context(|| format!("parsing manifest {}", path.display()))?;
    Ok(manifest.resolved)
}
