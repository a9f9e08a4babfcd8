//! Per-run manifests: enough to re-run a command and check its outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> std::io::Result<Self> {
        Ok(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&std::fs::read(path)?),
        })
    }

    pub fn of_bytes(label: &str, bytes: &[u8]) -> Self {
        FileDigest {
            path: label.to_string(),
            sha256: sha256_hex(bytes),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name; `newsxplain <argv...>` replays the run.
    pub argv: Vec<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// The global seed and every stage seed derived from it.
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            parameters: BTreeMap::new(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
        self
    }

    pub fn seed(&mut self, stage: &str, seed: u64) -> &mut Self {
        self.seeds.insert(stage.to_string(), seed);
        self
    }

    pub fn input(&mut self, path: &Path) -> std::io::Result<&mut Self> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> std::io::Result<&mut Self> {
        self.outputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    /// Write to `<out>/manifests/<command>[_<tag>].json`.
    pub fn write(&self, out: &Path, tag: Option<&str>) -> std::io::Result<PathBuf> {
        let dir = out.join("manifests");
        std::fs::create_dir_all(&dir)?;
        let name = match tag {
            Some(t) => format!("{}_{t}.json", self.command),
            None => format!("{}.json", self.command),
        };
        let path = dir.join(name);
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, json + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_bytes() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn written_manifest_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(
            "grid",
            &["grid".to_string(), "--seed".to_string(), "7".to_string()],
        );
        m.param("models", ["nb", "logreg"]).seed("global", 7);
        let path = m.write(dir.path(), Some("x")).unwrap();
        assert!(path.ends_with("manifests/grid_x.json"));
        let back: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
