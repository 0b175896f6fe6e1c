use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// Output files staged in full before any of them becomes visible.
#[derive(Default)]
pub struct Outputs {
    staged: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: &Path, bytes: impl Into<Vec<u8>>) {
        self.staged.push((path.to_path_buf(), bytes.into()));
    }

    /// Writes every file through a temporary sibling and renames it into
    /// place. If any step fails, files already renamed are removed again.
    pub fn commit(self) -> Result<()> {
        let mut temps = Vec::with_capacity(self.staged.len());
        for (path, bytes) in &self.staged {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = NamedTempFile::new_in(dir)
                .with_context(|| format!("cannot create a file next to {}", path.display()))?;
            tmp.write_all(bytes)
                .and_then(|_| tmp.as_file().sync_all())
                .with_context(|| format!("cannot write {}", path.display()))?;
            temps.push((tmp, path));
        }
        let mut done: Vec<&Path> = Vec::new();
        for (tmp, path) in temps {
            if let Err(e) = tmp.persist(path) {
                for p in done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e.error).with_context(|| format!("cannot write {}", path.display()));
            }
            done.push(path);
        }
        Ok(())
    }
}
