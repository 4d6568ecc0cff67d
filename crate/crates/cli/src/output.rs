use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use blowup_core::export::Table;
use serde::Serialize;

use crate::config::Formats;

/// Writes each file once, through a temporary sibling that is renamed into place.
pub struct OutputDir {
    root: PathBuf,
    formats: Formats,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, formats: Formats) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            formats,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let target = self.root.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)
            .with_context(|| format!("creating temporary file in {}", self.root.display()))?;
        tmp.write_all(bytes)
            .and_then(|_| tmp.as_file().sync_all())
            .with_context(|| format!("writing {}", target.display()))?;
        tmp.persist(&target)
            .with_context(|| format!("renaming into {}", target.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Skipped unless CSV output is enabled.
    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        if self.formats.csv {
            self.write_bytes(name, table.to_csv_string().as_bytes())?;
        }
        Ok(())
    }

    /// Skipped unless JSON output is enabled.
    pub fn report<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if self.formats.json {
            self.json(name, value)?;
        }
        Ok(())
    }

    /// Always written.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }
}
