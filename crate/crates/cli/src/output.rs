//! Tables, JSON documents and where they go.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Format, OutputArgs};
use crate::error::{CliError, CliResult};

pub const SCHEMA: u32 = 1;

/// A CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub headers: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, headers: &'static [&'static str]) -> Self {
        Table { name, headers, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::io("<csv buffer>", e.into_error()))
    }

    /// Plain-text rendering for the terminal.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = line(self.headers.to_vec());
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        out
    }
}

/// Float formatting shared by CSV and the terminal: shortest round-trip form.
pub fn f(x: f64) -> String {
    format!("{x:?}")
}

/// What a subcommand produced.
#[derive(Debug)]
pub struct Outcome {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    /// The first table is the one written when CSV goes to one stream.
    pub tables: Vec<Table>,
    pub default_format: Format,
    pub summary: String,
}

impl Outcome {
    pub fn new(command: &'static str, config: &impl Serialize, result: &impl Serialize) -> CliResult<Self> {
        Ok(Outcome {
            command,
            config: serde_json::to_value(config)?,
            result: serde_json::to_value(result)?,
            tables: Vec::new(),
            default_format: Format::Json,
            summary: String::new(),
        })
    }

    pub fn document(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "config": self.config,
            "result": self.result,
        })
    }

    fn json_bytes(&self) -> CliResult<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(&self.document())?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    fn primary_csv(&self) -> CliResult<Vec<u8>> {
        match self.tables.first() {
            Some(t) => t.to_csv(),
            None => Err(CliError::validation("format", format!("`{}` has no CSV output", self.command))),
        }
    }

    fn bytes(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Json => self.json_bytes(),
            Format::Csv => self.primary_csv(),
        }
    }

    /// Writes the data and the human summary. Data goes to stdout unless a
    /// file or directory is given; the summary goes to whichever stream the
    /// data does not use.
    pub fn emit(&self, out: &OutputArgs) -> CliResult<()> {
        let mut to_files = false;
        if let Some(dir) = &out.out_dir {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            for t in &self.tables {
                write_file(&dir.join(format!("{}.csv", t.name)), &t.to_csv()?)?;
            }
            write_file(&dir.join("summary.json"), &self.json_bytes()?)?;
            to_files = true;
        }
        if let Some(path) = &out.out {
            let format = out.format.unwrap_or_else(|| format_for_path(path, self.default_format));
            write_file(path, &self.bytes(format)?)?;
            to_files = true;
        }
        if to_files {
            print_stream(std::io::stdout(), &self.summary)?;
        } else {
            let format = out.format.unwrap_or(self.default_format);
            let bytes = self.bytes(format)?;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).map_err(|e| CliError::io("<stdout>", e))?;
            stdout.flush().map_err(|e| CliError::io("<stdout>", e))?;
            print_stream(std::io::stderr(), &self.summary)?;
        }
        Ok(())
    }
}

fn format_for_path(path: &Path, default: Format) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => default,
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn print_stream(mut w: impl Write, text: &str) -> CliResult<()> {
    if text.is_empty() {
        return Ok(());
    }
    w.write_all(text.as_bytes()).map_err(|e| CliError::io("<terminal>", e))?;
    if !text.ends_with('\n') {
        w.write_all(b"\n").map_err(|e| CliError::io("<terminal>", e))?;
    }
    Ok(())
}
