//! Call detail record schema, CSV I/O and stage-1 cleaning.
//!
//! A [`Dataset`] is an immutable, (timestamp, record_id)-sorted collection
//! of [`CdrRecord`]s bounded by an observation window. Parsing never drops
//! a malformed line silently: every reject is reported with its line
//! number and a reason.

mod clean;
mod io;
mod schema;

pub use clean::{clean, CleanStats};
pub use io::{
    parse_cdr_file, parse_cdr_reader, read_labels, write_labels, ParseReport, RejectedLine,
    CDR_HEADER,
};
pub use schema::{CdrRecord, Dataset, Direction, Label, LabelTable, Service};

use chrono::{DateTime, Utc};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CdrError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid window: start {start} must be before end {end}")]
    InvalidWindow {
        start: DateTime<Utc>,
        end: DateTime<Utc>,
    },
    #[error("label file error: {0}")]
    Labels(String),
}

/// Keeps exactly the records with `start <= timestamp < end`.
pub fn slice_window(
    d: &Dataset,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
) -> Result<Dataset, CdrError> {
    if start >= end {
        return Err(CdrError::InvalidWindow { start, end });
    }
    let records = d
        .records()
        .iter()
        .filter(|r| r.timestamp >= start && r.timestamp < end)
        .cloned()
        .collect();
    Ok(Dataset::new(records, start, end))
}

#[cfg(test)]
mod tests;
