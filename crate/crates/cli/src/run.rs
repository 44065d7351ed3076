//! Bookkeeping shared by every command: artifacts written, seeds used, the
//! resolved configuration, and the manifest that records them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use dynsleuth_core::report::{write_atomic, RunManifest, MANIFEST_SCHEMA_VERSION};
use serde::Serialize;
use serde_json::{Map, Value};

pub struct Run {
    command: Vec<String>,
    started: String,
    config: Map<String, Value>,
    seeds: Vec<u64>,
    artifacts: Vec<PathBuf>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// `<out>.manifest.json`, next to a file or directory output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "run".into());
    name.push(".manifest.json");
    out.with_file_name(name)
}

impl Run {
    pub fn start() -> Self {
        Self {
            command: std::env::args().collect(),
            started: now(),
            config: Map::new(),
            seeds: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.config.insert(key.to_owned(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn seed(&mut self, seed: u64) {
        self.seeds.push(seed);
    }

    pub fn seeds(&mut self, seeds: &[u64]) {
        self.seeds.extend_from_slice(seeds);
    }

    pub fn artifact(&mut self, path: impl Into<PathBuf>) {
        self.artifacts.push(path.into());
    }

    pub fn write_bytes(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.artifact(path);
        Ok(())
    }

    pub fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(path, text.as_bytes())
    }

    /// Checks every recorded artifact is on disk and writes the manifest.
    pub fn finish(self, manifest: &Path) -> Result<()> {
        for a in &self.artifacts {
            let meta = fs::metadata(a).with_context(|| format!("artifact {} missing after run", a.display()))?;
            if meta.is_file() && meta.len() == 0 {
                bail!("artifact {} is empty", a.display());
            }
        }
        let m = RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: self.command,
            config: Value::Object(self.config),
            seeds: self.seeds,
            artifacts: self.artifacts,
            started: self.started,
            finished: now(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
        };
        m.save(manifest).with_context(|| format!("writing manifest {}", manifest.display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/a.policy")), Path::new("out/a.policy.manifest.json"));
        assert_eq!(manifest_path(Path::new("maps/")), Path::new("maps.manifest.json"));
    }

    #[test]
    fn missing_artifact_fails_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = Run::start();
        run.artifact(dir.path().join("never-written"));
        assert!(run.finish(&dir.path().join("m.json")).is_err());

        let mut ok = Run::start();
        ok.write_json(&dir.path().join("sub/x.json"), &serde_json::json!({"a": 1})).unwrap();
        ok.finish(&dir.path().join("m.json")).unwrap();
        let m = RunManifest::load(dir.path().join("m.json")).unwrap();
        assert_eq!(m.artifacts.len(), 1);
    }
}
