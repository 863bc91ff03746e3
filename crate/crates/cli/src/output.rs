// SPDX-License-Identifier: Apache-2.0
//! Tabular artifacts and their CSV/JSON encodings.

use crate::error::CliError;
use qlab_core::pulse::{self, ChannelList};
use serde_json::{Map, Number, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Bin,
}

impl Format {
    /// `.json` selects JSON and `.qseq`/`.bin` select binary; anything else is CSV.
    pub fn infer(out: Option<&Path>) -> Self {
        match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("qseq") | Some("bin") => Format::Bin,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) if v.is_nan() => "NaN".into(),
            Cell::F(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::F(v) => format!("{v:.16e}"),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => {
                Number::from_f64(*v).map_or_else(|| Value::String(self.csv()), Value::Number)
            }
            Cell::I(v) => Value::from(*v),
            Cell::U(v) => Value::from(*v),
            Cell::B(v) => Value::Bool(*v),
            Cell::S(v) => Value::String(v.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Rows under fixed headers plus optional scalar summary entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(&'static str, Cell)>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.summary.push((key, value.into()));
    }

    /// Summary entries become leading `# key: value` lines.
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut out = Vec::new();
        for (k, v) in &self.summary {
            writeln!(out, "# {k}: {}", v.csv()).map_err(CliError::runtime)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers).map_err(CliError::runtime)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .map_err(CliError::runtime)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.headers
                        .iter()
                        .zip(r)
                        .map(|(h, c)| (h.to_string(), c.json()))
                        .collect(),
                )
            })
            .collect();
        let mut doc = Map::new();
        if !self.summary.is_empty() {
            doc.insert(
                "summary".into(),
                Value::Object(
                    self.summary
                        .iter()
                        .map(|(k, v)| (k.to_string(), v.json()))
                        .collect(),
                ),
            );
        }
        doc.insert("rows".into(), Value::Array(rows));
        let mut bytes =
            serde_json::to_vec_pretty(&Value::Object(doc)).map_err(CliError::runtime)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

pub enum Artifact {
    Table(Table),
    Sequence(ChannelList),
    DryRun,
}

fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<Vec<PathBuf>, CliError> {
    match out {
        Some(p) => {
            fs::write(p, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            Ok(vec![p.to_path_buf()])
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(CliError::runtime)?;
            Ok(Vec::new())
        }
    }
}

/// Writes the artifact and returns the paths created.
pub fn emit(
    artifact: &Artifact,
    format: Format,
    out: Option<&Path>,
) -> Result<Vec<PathBuf>, CliError> {
    match (artifact, format) {
        (Artifact::DryRun, _) => Ok(Vec::new()),
        (Artifact::Table(t), Format::Csv) => write_bytes(out, &t.to_csv()?),
        (Artifact::Table(t), Format::Json) => write_bytes(out, &t.to_json()?),
        (Artifact::Table(_), Format::Bin) => Err(CliError::Config(
            "binary output is only available for pulse-compile".into(),
        )),
        (Artifact::Sequence(cl), Format::Bin) => {
            write_bytes(out, &pulse::encode(cl).map_err(CliError::runtime)?)
        }
        (Artifact::Sequence(cl), Format::Csv) => {
            let out =
                out.ok_or_else(|| CliError::Config("CSV sequence export needs --out".into()))?;
            let dir = out
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let stem = out
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("sequence");
            pulse::write_csv(cl, dir, stem).map_err(CliError::runtime)
        }
        (Artifact::Sequence(_), Format::Json) => {
            Err(CliError::Config("sequences export as bin or csv".into()))
        }
    }
}
