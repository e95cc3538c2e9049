//! Deterministic report writers.
//!
//! JSON keys keep struct declaration order and every float is written with
//! 17 significant digits, so identical runs produce byte-identical files and
//! values round-trip exactly. CSV is RFC-4180 (CRLF, quoted when needed).

use std::io::Write;

use serde::Serialize;

use crate::error::CliError;

/// serde_json formatter that writes floats as `{:.16e}` (17 significant
/// digits, enough to reconstruct any f64 bit pattern).
struct F17Formatter;

impl serde_json::ser::Formatter for F17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a report to JSON with fixed float formatting and a trailing
/// newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, F17Formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::InvalidConfig(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Formats one float the way the reports do.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Writes an RFC-4180 CSV table (CRLF line endings).
pub fn to_csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    writer
        .write_record(header)
        .map_err(|e| CliError::InvalidConfig(format!("csv failure: {e}")))?;
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| CliError::InvalidConfig(format!("csv failure: {e}")))?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::InvalidConfig(format!("csv failure: {e}")))
}

/// Writes report bytes to the configured destination (stdout when `None`).
pub fn emit(path: Option<&str>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}
