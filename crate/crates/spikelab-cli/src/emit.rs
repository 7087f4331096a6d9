//! Artifact emission: atomic writes, config echoes and content hashes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;

use spikelab_core::util::fnv1a64_hex;

pub struct Emitter {
    out_dir: PathBuf,
    config_echo: Value,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(out_dir: &Path, config_echo: Value) -> Result<Self> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            config_echo,
            written: Vec::new(),
        })
    }

    fn write_atomic(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        let tmp = self.out_dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("renaming into {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// JSON artifact carrying the resolved config and its hash.
    pub fn json(&mut self, name: &str, body: Value) -> Result<PathBuf> {
        let config_bytes = serde_json::to_vec(&self.config_echo)?;
        let doc = serde_json::json!({
            "config": self.config_echo,
            "config_hash": fnv1a64_hex(&config_bytes),
            "data": body,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        self.write_atomic(name, &bytes)
    }

    /// CSV artifact plus a sibling meta file with the config echo and the
    /// hash of the CSV bytes.
    pub fn csv(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.write_atomic(name, content.as_bytes())?;
        let meta_name = format!("{}.meta.json", name.trim_end_matches(".csv"));
        let config_bytes = serde_json::to_vec(&self.config_echo)?;
        let meta = serde_json::json!({
            "config": self.config_echo,
            "config_hash": fnv1a64_hex(&config_bytes),
            "artifact": name,
            "content_hash": fnv1a64_hex(content.as_bytes()),
        });
        let mut bytes = serde_json::to_vec_pretty(&meta)?;
        bytes.push(b'\n');
        self.write_atomic(&meta_name, &bytes)?;
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
