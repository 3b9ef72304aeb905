//! Output directory handling, run manifests, and the summary file.
//!
//! Every run writes a `manifest.json` carrying the resolved parameters and
//! master seed; a run is reproducible from the manifest alone. Worker count
//! deliberately stays out of it (results are worker-invariant). On failure
//! every file written so far is removed.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct OutputDir {
    dir: PathBuf,
    written: RefCell<Vec<PathBuf>>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<OutputDir> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputDir { dir: dir.to_path_buf(), written: RefCell::new(Vec::new()) })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.borrow_mut().push(path.clone());
        Ok(path)
    }

    /// Remove everything written so far; called when a run fails partway.
    pub fn remove_partial_outputs(&self) {
        for path in self.written.borrow().iter() {
            let _ = fs::remove_file(path);
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    params: serde_json::Value,
}

pub fn write_manifest(out: &OutputDir, command: &str, seed: u64, params: serde_json::Value) -> Result<()> {
    let manifest = Manifest { command, version: env!("CARGO_PKG_VERSION"), seed, params };
    out.write("manifest.json", &format!("{}\n", serde_json::to_string_pretty(&manifest)?))?;
    Ok(())
}

/// Minimal CSV writer; fields never need quoting in our schemas.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Csv {
        Csv { buf: format!("{header}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn f(v: f64) -> String {
    format!("{v}")
}
