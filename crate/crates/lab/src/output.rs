//! CSV tables and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::LabError;

/// Version of every table layout written here.
pub const SCHEMA_VERSION: u32 = 1;

/// What every file of a run is stamped with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    /// Hash the canonical config text.
    pub fn new(experiment: &str, config_toml: &str, seed: u64) -> Self {
        Self { experiment: experiment.to_string(), config_hash: sha256_hex(config_toml.as_bytes()), seed }
    }

    fn schema_line(&self) -> String {
        format!(
            "# d2dlab schema v{SCHEMA_VERSION} | experiment={} | config_hash={} | seed={}",
            self.experiment, self.config_hash, self.seed
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A table in memory; the header names every column with its unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a row; panics on a column-count mismatch, which is a bug.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width for {}", self.name);
        self.rows.push(row);
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Write `tables` and `manifest.json` under `dir`.
pub fn write_run(dir: &Path, prov: &Provenance, config_toml: &str, tables: &[Table]) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut paths = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        let mut body = prov.schema_line();
        body.push('\n');
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Runtime(e.to_string()))?;
        body.push_str(std::str::from_utf8(&bytes).expect("csv writes utf-8"));
        fs::write(&path, body).map_err(|e| LabError::io(&path, e))?;
        paths.push(path);
    }
    let cfg_path = dir.join("config.toml");
    fs::write(&cfg_path, config_toml).map_err(|e| LabError::io(&cfg_path, e))?;
    let manifest = Manifest {
        schema: SCHEMA_VERSION,
        experiment: &prov.experiment,
        config_hash: &prov.config_hash,
        seed: prov.seed,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        core_version: d2d_core_version(),
        files: tables.iter().map(|t| format!("{}.csv", t.name)).collect(),
        config: "config.toml",
    };
    let m_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| LabError::Runtime(e.to_string()))?;
    fs::write(&m_path, text + "\n").map_err(|e| LabError::io(&m_path, e))?;
    paths.push(m_path);
    Ok(paths)
}

// both crates share the workspace version
fn d2d_core_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    experiment: &'a str,
    config_hash: &'a str,
    seed: u64,
    tool: &'a str,
    version: &'a str,
    core_version: &'a str,
    files: Vec<String>,
    config: &'a str,
}

/// A CSV read back: provenance line, header and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadTable {
    pub name: String,
    pub schema_line: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table(path: &Path) -> Result<ReadTable, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let (schema_line, body) = match text.strip_prefix('#') {
        Some(_) => match text.split_once('\n') {
            Some((first, rest)) => (Some(first.to_string()), rest),
            None => (Some(text.clone()), ""),
        },
        None => (None, text.as_str()),
    };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(ReadTable { name, schema_line, header, rows })
}
