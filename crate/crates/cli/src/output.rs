//! Output files: CSV with a `# key = value` manifest header, and a
//! manifest.json carrying the parameter record and SHA-256 checksums.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const OUT_ENV: &str = "GADGETLAB_OUT";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, String>,
    /// File name to hex SHA-256 of its full contents.
    pub outputs: BTreeMap<String, String>,
}

pub struct Writer {
    dir: PathBuf,
    manifest: RunManifest,
    header: String,
}

impl Writer {
    pub fn new(
        subcommand: &str,
        params: Vec<(String, String)>,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let dir = PathBuf::from(std::env::var(OUT_ENV).unwrap_or_else(|_| ".".into()));
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let version = env!("CARGO_PKG_VERSION").to_string();
        let mut header = format!("# subcommand = {subcommand}\n# version = {version}\n");
        if let Some(s) = seed {
            header.push_str(&format!("# seed = {s}\n"));
        }
        for (k, v) in &params {
            header.push_str(&format!("# {k} = {v}\n"));
        }
        Ok(Self {
            dir,
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                version,
                seed,
                parameters: params.into_iter().collect(),
                outputs: BTreeMap::new(),
            },
            header,
        })
    }

    /// Writes `body` (header row plus data rows) under the manifest header.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("{}{}", self.header, body);
        let path = self.dir.join(name);
        fs::write(&path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.manifest.outputs.insert(
            name.to_string(),
            hex::encode(Sha256::digest(text.as_bytes())),
        );
        println!("wrote {}", path.display());
        Ok(())
    }

    pub fn finish(self) -> Result<(), CliError> {
        let path = self
            .dir
            .join(format!("{}.manifest.json", self.manifest.subcommand));
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&path, json + "\n")
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

/// Scientific notation with full round-trip precision.
pub fn sci(v: f64) -> String {
    format!("{v:e}")
}
