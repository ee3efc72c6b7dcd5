//! JSONL input and output with a manifest header line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use confsweep::SweepRecord;

/// First line of every JSONL output. Only fields that are fixed by the
/// command line appear here, so identical flags give identical bytes.
#[derive(Debug, Serialize)]
pub struct Manifest {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    flags: BTreeMap<&'static str, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

impl Manifest {
    pub fn new(subcommand: &'static str) -> Self {
        Manifest {
            tool: "confsweep",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            n: None,
            k: None,
            flags: BTreeMap::new(),
            input: None,
            output: None,
        }
    }

    pub fn params(mut self, n: usize, k: usize) -> Self {
        self.n = Some(n);
        self.k = Some(k);
        self
    }

    pub fn flag(mut self, name: &'static str, value: Value) -> Self {
        self.flags.insert(name, value);
        self
    }

    pub fn input(mut self, path: Option<&Path>) -> Self {
        self.input = Some(path.map_or_else(|| "-".to_string(), |p| p.display().to_string()));
        self
    }

    pub fn output(mut self, path: Option<&Path>) -> Self {
        self.output = Some(path.map_or_else(|| "-".to_string(), |p| p.display().to_string()));
        self
    }
}

pub struct Output {
    inner: Box<dyn Write>,
}

impl Output {
    /// Opens `path` (stdout when absent) and writes the manifest line.
    pub fn create(path: Option<&Path>, manifest: &Manifest) -> Result<Self> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let mut out = Output { inner };
        out.record(&serde_json::json!({ "manifest": manifest }))?;
        Ok(out)
    }

    pub fn record<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.inner, value)?;
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Streams configuration records from `path` (stdin when absent), skipping
/// manifest lines and blank lines.
pub fn records(path: Option<&Path>) -> Result<impl Iterator<Item = Result<SweepRecord>>> {
    let reader: Box<dyn BufRead> = match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))
        }
        _ => Box::new(BufReader::new(io::stdin().lock())),
    };
    Ok(reader.lines().enumerate().filter_map(|(i, line)| {
        let parse = || -> Result<Option<SweepRecord>> {
            let line = line?;
            if line.trim().is_empty() {
                return Ok(None);
            }
            let value: Value = serde_json::from_str(&line).with_context(|| format!("line {}: not JSON", i + 1))?;
            if value.get("manifest").is_some() {
                return Ok(None);
            }
            let record =
                serde_json::from_value(value).with_context(|| format!("line {}: not a configuration record", i + 1))?;
            Ok(Some(record))
        };
        parse().transpose()
    }))
}

pub fn read_records(path: Option<&Path>) -> Result<Vec<SweepRecord>> {
    records(path)?.collect()
}
