//! Output directory with atomic file writes and the shared CSV header.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use tempfile::NamedTempFile;

pub const UNITS_NOTE: &str = "time in units of 1/gamma";

pub struct Output {
    dir: PathBuf,
    header: Vec<String>,
    written: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path, header: Vec<String>) -> anyhow::Result<Output> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Output { dir: dir.to_path_buf(), header, written: Vec::new() })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Writes `name` via a temporary file in the same directory, renamed
    /// into place once complete.
    pub fn write<F>(&mut self, name: &str, fill: F) -> anyhow::Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write, &[String]) -> ctqw_core::Result<()>,
    {
        let path = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).with_context(|| format!("writing into {}", self.dir.display()))?;
        {
            let mut w = BufWriter::new(tmp.as_file_mut());
            fill(&mut w, &self.header).with_context(|| format!("writing {name}"))?;
            w.flush()?;
        }
        tmp.persist(&path).with_context(|| format!("renaming into {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<PathBuf> {
        self.write(name, |w, _| ctqw_core::io::write_json(&mut &mut *w, value))
    }
}
