use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Version of the output layout, bumped when files or columns change.
pub const SPEC_VERSION: &str = "1";

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub spec_version: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    /// Sample size of the ingested or simulated data.
    pub n: Option<usize>,
    pub seed: u64,
    pub rejected_lines: Vec<u64>,
    /// Grid points where a naive estimator is singular, per kind.
    pub masked: BTreeMap<String, Vec<f64>>,
    /// Evaluations moved off a data point, per kind.
    pub perturbations: BTreeMap<String, usize>,
    pub files: Vec<String>,
}

impl<'a> Metadata<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self {
            spec_version: SPEC_VERSION,
            tool: "stereoboot",
            version: env!("CARGO_PKG_VERSION"),
            config,
            n: None,
            seed: config.seed,
            rejected_lines: Vec::new(),
            masked: BTreeMap::new(),
            perturbations: BTreeMap::new(),
            files: Vec::new(),
        }
    }
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| output_err(dir, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| output_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| output_err(path, e))?;
    }
    w.flush().map_err(|e| output_err(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| output_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| output_err(path, e))?;
    w.write_all(b"\n").map_err(|e| output_err(path, e))?;
    w.flush().map_err(|e| output_err(path, e))
}

/// Collects written file names for the metadata.
pub struct Writer<'a> {
    dir: &'a Path,
    pub written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    pub fn new(dir: &'a Path) -> CliResult<Self> {
        ensure_dir(dir)?;
        Ok(Self { dir, written: Vec::new() })
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> CliResult<()> {
        let path = self.dir.join(name);
        write_csv(&path, rows)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.written.push(path);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect()
    }

    /// Writes `metadata.json` listing every file written so far.
    pub fn finish(mut self, mut meta: Metadata<'_>) -> CliResult<Vec<PathBuf>> {
        meta.files = self.names();
        self.json("metadata.json", &meta)?;
        Ok(self.written)
    }
}
