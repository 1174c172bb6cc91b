use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{OutputSettings, RunConfig};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Pass,
    Fail,
}

/// Machine-readable report. Everything in it is a function of the command,
/// the configuration and the seed.
#[derive(Serialize)]
pub struct Report<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub status: Status,
    pub config: &'a RunConfig,
    pub result: serde_json::Value,
}

/// Non-deterministic facts about a run, kept apart from the report.
#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    config_hash: &'a str,
    unix_time: u64,
    argv: Vec<String>,
    output: &'a OutputSettings,
}

/// One directory per (command, configuration).
pub struct RunDir {
    pub path: PathBuf,
    pub command: String,
    pub hash: String,
}

impl RunDir {
    pub fn create(root: &Path, command: &str, hash: &str) -> Result<Self, CliError> {
        let path = root.join(format!("{command}-{}", &hash[..16]));
        fs::create_dir_all(&path)?;
        Ok(RunDir {
            path,
            command: command.to_string(),
            hash: hash.to_string(),
        })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn writer(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        Ok(BufWriter::new(File::create(self.file(name))?))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        fs::write(self.file(name), text)?;
        Ok(())
    }

    pub fn write_metadata(&self, output: &OutputSettings) -> Result<(), CliError> {
        let unix_time = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.write_json(
            "meta.json",
            &Metadata {
                command: &self.command,
                config_hash: &self.hash,
                unix_time,
                argv: std::env::args().collect(),
                output,
            },
        )
    }
}

/// Rows of a CSV table; the seed and config hash ride along in every row.
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        CsvTable {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &RunDir, name: &str, seed: u64) -> Result<(), CliError> {
        let mut w = dir.writer(name)?;
        writeln!(w, "{},seed,config_hash", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{},{seed},{}", row.join(","), dir.hash)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip form, as in the trajectory log.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
