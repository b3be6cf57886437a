use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use crate::error::{Error, Result};

/// One row of experiment output. Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub error: f64,
    pub within_p: bool,
    pub n_preps: u64,
    pub m_evolutions: u64,
    pub total_time: f64,
    pub u_uses: u64,
    pub depth: u64,
    pub wall_ms: f64,
}

pub const COLUMNS: [&str; 14] = [
    "trial",
    "seed",
    "estimate_re",
    "estimate_im",
    "exact_re",
    "exact_im",
    "error",
    "within_p",
    "n_preps",
    "m_evolutions",
    "total_time",
    "u_uses",
    "depth",
    "wall_ms",
];

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

pub fn write_records<W: Write>(records: &[TrialRecord], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            writer.write_record(COLUMNS).map_err(csv_error)?;
            for r in records {
                writer.serialize(r).map_err(csv_error)?;
            }
            writer.flush()?;
        }
        OutputFormat::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| Error::Internal(e.to_string()))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Writes records to `path`, or to stdout when `path` is `None`.
pub fn emit(records: &[TrialRecord], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    match path {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_records(records, format, std::io::BufWriter::new(file))
        }
        None => write_records(records, format, std::io::stdout().lock()),
    }
}

pub fn parse_csv<R: std::io::Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != COLUMNS {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    reader.deserialize().map(|r| r.map_err(csv_error)).collect()
}

pub fn parse_jsonl<R: BufRead>(input: R) -> Result<Vec<TrialRecord>> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(records)
}
