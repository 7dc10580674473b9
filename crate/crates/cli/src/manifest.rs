//! Run manifests: every invocation records its command, parameters, seed,
//! version, and the content hashes of the files it wrote, so any output can
//! be reproduced byte-for-byte from the manifest alone.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// BTreeMap keeps the serialization order deterministic.
    pub parameters: BTreeMap<String, String>,
    pub master_seed: u64,
    pub tool_version: String,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn record_output(&mut self, path: &Path, contents: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(contents);
        self.outputs.push(OutputFile {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
    }
}
