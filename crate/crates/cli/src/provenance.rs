use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use reactscope::Fingerprint;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
struct FileRecord {
    role: String,
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    command: &'a str,
    version: &'a str,
    inputs: &'a [FileRecord],
    fingerprints: &'a BTreeMap<String, String>,
    outputs: &'a [FileRecord],
}

/// One command invocation: records every input and output file and, on
/// `finish`, writes `<command>.config.toml` and `<command>.provenance.json`
/// into the output directory.
pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    command: &'static str,
    inputs: Vec<FileRecord>,
    outputs: Vec<(String, PathBuf)>,
    fingerprints: BTreeMap<String, String>,
}

fn file_record(role: &str, path: &Path) -> Result<FileRecord, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileRecord {
        role: role.to_string(),
        path: path.display().to_string(),
        bytes: bytes.len() as u64,
        sha256: Fingerprint::of_bytes(&bytes).to_hex(),
    })
}

impl<'a> Run<'a> {
    pub fn start(cfg: &'a RunConfig, command: &'static str) -> Result<Self, CliError> {
        std::fs::create_dir_all(cfg.out()).map_err(|e| CliError::io(cfg.out(), e))?;
        Ok(Run { cfg, command, inputs: Vec::new(), outputs: Vec::new(), fingerprints: BTreeMap::new() })
    }

    /// Checks that an input exists and records its hash.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<PathBuf, CliError> {
        if !path.is_file() {
            return Err(CliError::Usage(format!("missing {role} input: {}", path.display())));
        }
        self.inputs.push(file_record(role, path)?);
        Ok(path.to_path_buf())
    }

    pub fn fingerprint(&mut self, name: &str, fp: Fingerprint) {
        self.fingerprints.insert(name.to_string(), fp.to_hex());
    }

    /// Path of an output file inside the output directory, recorded for hashing.
    pub fn output(&mut self, name: &str) -> PathBuf {
        let path = self.cfg.out().join(name);
        self.outputs.push((name.to_string(), path.clone()));
        path
    }

    pub fn write(&mut self, name: &str, body: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        let path = self.output(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.outputs.sort();
        self.outputs.dedup();
        let outputs = self
            .outputs
            .iter()
            .map(|(name, path)| file_record(name, path))
            .collect::<Result<Vec<_>, _>>()?;
        let config_path = self.cfg.out().join(format!("{}.config.toml", self.command));
        std::fs::write(&config_path, self.cfg.to_toml()).map_err(|e| CliError::io(&config_path, e))?;
        let prov = Provenance {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: &self.inputs,
            fingerprints: &self.fingerprints,
            outputs: &outputs,
        };
        let prov_path = self.cfg.out().join(format!("{}.provenance.json", self.command));
        let mut json = serde_json::to_string_pretty(&prov).expect("provenance serializes");
        json.push('\n');
        std::fs::write(&prov_path, json).map_err(|e| CliError::io(&prov_path, e))?;
        log::info!("{}: wrote {} files to {}", self.command, outputs.len() + 2, self.cfg.out().display());
        Ok(())
    }
}
