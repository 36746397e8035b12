//! Output directory bookkeeping and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::TOOL_VERSION;

pub struct OutDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    /// Buffered writer for `name`; the file is listed in the manifest.
    pub fn writer(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        self.record(name);
        Ok(BufWriter::new(f))
    }

    /// Runs `body` on a writer for `name` and flushes it.
    pub fn with_writer(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> conflux::Result<()>) -> Result<()> {
        let mut w = self.writer(name)?;
        body(&mut w).with_context(|| format!("writing {name}"))?;
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_manifest(&mut self, cfg: &RunConfig, status: &str, expect_fail: bool, summary: &Value) -> Result<()> {
        let mut files = self.files.clone();
        files.push("manifest.json".into());
        let manifest = json!({
            "tool": "conflux",
            "version": TOOL_VERSION,
            "command": cfg.command.map(|c| c.name()),
            "status": status,
            "expect_fail": expect_fail,
            "config": cfg,
            "files": files,
            "summary": summary,
        });
        self.write_json("manifest.json", &manifest)
    }
}

/// CSV writer over an output file.
pub fn csv_writer(out: &mut OutDir, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(out.writer(name)?))
}
