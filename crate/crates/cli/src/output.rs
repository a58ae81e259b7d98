use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use textrait_core::seed;

#[derive(Debug, Serialize)]
struct ManifestEntry {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    files: &'a [ManifestEntry],
}

/// Writes every artifact of one command under the output directory and
/// records it in `manifest.json`. Refuses to overwrite any declared input.
pub struct Output {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    files: Vec<ManifestEntry>,
}

impl Output {
    pub fn create(dir: &Path, inputs: &[&Path]) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            inputs: inputs.iter().filter_map(|p| p.canonicalize().ok()).collect(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let bytes = bytes.as_ref();
        let path = self.path(name);
        if let Ok(existing) = path.canonicalize() {
            if self.inputs.contains(&existing) {
                bail!(crate::UsageError(format!(
                    "refusing to overwrite input file {}",
                    path.display()
                )));
            }
        }
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        log::debug!("wrote {}", path.display());
        self.files.retain(|f| f.path != name);
        self.files.push(ManifestEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: seed::fingerprint(bytes),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, text)
    }

    /// Write the manifest; consumes the writer.
    pub fn finish(self, command: &str) -> Result<()> {
        let manifest = Manifest {
            command,
            files: &self.files,
        };
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
