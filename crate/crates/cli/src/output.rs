use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::fail::CliError;
use crate::spec::ExperimentSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes result files into one directory, each tagged with the artifact
/// version and the experiment hash.
pub struct Output {
    dir: PathBuf,
    spec: ExperimentSpec,
    hash: String,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, spec: &ExperimentSpec) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            spec: spec.clone(),
            hash: spec.hash(),
            written: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<fs::File, CliError> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path)?;
        self.written.push(path);
        Ok(file)
    }

    fn header(&self) -> serde_json::Value {
        let mut spec = self.spec.clone();
        spec.out_dir = None;
        json!({ "artifact": "fasep", "version": VERSION, "spec_sha256": self.hash, "spec": spec })
    }

    /// A header line followed by one JSON document per item.
    pub fn jsonl<T: Serialize>(&mut self, name: &str, items: &[T]) -> Result<(), CliError> {
        let mut text = serde_json::to_string(&self.header()).expect("header serializes");
        text.push('\n');
        for item in items {
            text.push_str(&serde_json::to_string(item).map_err(|e| CliError::Spec(e.to_string()))?);
            text.push('\n');
        }
        self.create(name)?.write_all(text.as_bytes())?;
        Ok(())
    }

    /// CSV with a leading `#` comment line carrying version and hash.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut text = format!("# fasep {VERSION} spec-sha256 {}\n{}\n", self.hash, columns.join(","));
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.create(name)?.write_all(text.as_bytes())?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let mut doc = self.header();
        doc["result"] = serde_json::to_value(body).map_err(|e| CliError::Spec(e.to_string()))?;
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        self.create(name)?.write_all(text.as_bytes())?;
        Ok(())
    }
}
