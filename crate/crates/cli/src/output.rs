//! CSV and JSON emission of [`StatRow`] tables.

use std::io::{Read, Write};
use std::path::Path;

use fracheat::montecarlo::report::StatRow;

use crate::config::OutputFormat;

pub fn write_rows<W: Write>(rows: &[StatRow], format: OutputFormat, out: W) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")
        }
    }
}

pub fn read_rows<R: Read>(input: R, format: OutputFormat) -> std::io::Result<Vec<StatRow>> {
    match format {
        OutputFormat::Csv => csv::Reader::from_reader(input)
            .deserialize()
            .collect::<Result<Vec<StatRow>, _>>()
            .map_err(std::io::Error::other),
        OutputFormat::Json => serde_json::from_reader(input).map_err(std::io::Error::other),
    }
}

pub fn read_rows_file(path: &Path, format: OutputFormat) -> std::io::Result<Vec<StatRow>> {
    read_rows(std::fs::File::open(path)?, format)
}

/// Write to `path`, or to stdout when `None`.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes)?;
            s.flush()
        }
    }
}
