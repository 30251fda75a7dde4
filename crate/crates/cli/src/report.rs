//! Run manifests and report output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything needed to reproduce a run. Embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub tolerances: BTreeMap<&'static str, f64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new<P: Serialize>(command: &str, parameters: &P, seed: Option<u64>) -> Result<Self> {
        Ok(RunManifest {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters)?,
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            tolerances: BTreeMap::new(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }

    pub fn tolerance(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.insert(name, value);
        self
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

/// Pretty JSON with the manifest as its first field.
pub fn write_json<T: Serialize>(out: Option<&Path>, manifest: &RunManifest, body: &T) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &Envelope { manifest, body })?;
    writeln!(w)?;
    Ok(())
}

/// CSV preceded by a `#`-comment line holding the manifest as JSON.
pub fn write_csv<H: AsRef<str>>(
    out: Option<&Path>,
    manifest: &RunManifest,
    header: &[H],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut w = sink(out)?;
    writeln!(w, "# {}", serde_json::to_string(manifest)?)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header.iter().map(|h| h.as_ref()))?;
    for r in rows {
        csv.write_record(r)?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
