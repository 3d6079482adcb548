//! Thin helpers over `csv` for the tab-separated files used throughout.
//!
//! Files are UTF-8, tab-delimited, unquoted, with a header row. Columns are
//! located by header name so extra columns are tolerated.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing required column `{0}` in header")]
    MissingColumn(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TsvError {
    pub fn row(line: u64, message: impl Into<String>) -> Self {
        TsvError::Row {
            line,
            message: message.into(),
        }
    }
}

pub fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .flexible(false)
        .from_reader(input)
}

pub fn writer<W: Write>(output: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(output)
}

/// Resolves the positions of `names` in the header of `rdr`.
pub fn columns<R: Read>(rdr: &mut csv::Reader<R>, names: &[&str]) -> Result<Vec<usize>, TsvError> {
    let headers = rdr.headers()?.clone();
    names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| TsvError::MissingColumn((*name).to_string()))
        })
        .collect()
}

/// Line number of a record (1-based, header is line 1).
pub fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

pub fn field(record: &csv::StringRecord, idx: usize) -> &str {
    record.get(idx).unwrap_or("").trim()
}
