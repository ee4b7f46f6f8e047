use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "politeness-kit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Embedded in every artifact: which tool produced it, with which resolved
/// configuration, from which inputs.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    /// SHA-256 of the compact JSON of `config`.
    pub config_hash: String,
    /// SHA-256 of every input file, keyed by path.
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        let compact = serde_json::to_string(&config).expect("config serializes");
        Provenance {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            config_hash: hex::encode(Sha256::digest(compact.as_bytes())),
            config,
            inputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> io::Result<()> {
        self.inputs.insert(path.display().to_string(), file_sha256(path)?);
        Ok(())
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("provenance serializes")
    }
}

pub fn file_sha256(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_config_only() {
        let a = Provenance::new("x", serde_json::json!({"seed": 1}));
        let b = Provenance::new("x", serde_json::json!({"seed": 1}));
        let c = Provenance::new("x", serde_json::json!({"seed": 2}));
        assert_eq!(a.config_hash, b.config_hash);
        assert_ne!(a.config_hash, c.config_hash);
        assert_eq!(a.config_hash.len(), 64);
    }
}
