use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Tabular output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

/// Buffered writer to `path`, or stdout when absent.
pub fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Run(aiot_rx::Error::Io(format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes `rows` as JSON lines.
pub fn write_jsonl<T: Serialize, W: Write>(rows: &[T], mut out: W) -> Result<(), CliError> {
    for r in rows {
        let line = serde_json::to_string(r)
            .map_err(|e| CliError::Invariant(format!("serialization failed: {e}")))?;
        writeln!(out, "{line}").map_err(io_err)?;
    }
    Ok(())
}

pub fn io_err(e: io::Error) -> CliError {
    CliError::Run(e.into())
}

/// Renders an optional number for a summary line.
pub fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}
