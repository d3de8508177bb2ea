//! Output plumbing: byte-stable JSON with 17-significant-digit floats,
//! CSV with the same float formatting, and human tables at 6 digits.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

/// JSON formatter writing every `f64` as `{:.16e}` (17 significant digits,
/// round-trip exact and byte-stable across runs).
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value
        .serialize(&mut ser)
        .context("serializing JSON output")?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// `{:.16e}` float cell for CSV rows.
pub fn csv_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// 6-digit float for human tables.
pub fn table_f64(v: f64) -> String {
    format!("{v:.6}")
}

/// Where the primary output goes.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    pub fn write(&self, content: &str) -> Result<()> {
        match &self.path {
            Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
            None => {
                io::stdout()
                    .write_all(content.as_bytes())
                    .context("writing stdout")?;
                Ok(())
            }
        }
    }
}

/// Assemble a CSV document from a header and rows.
pub fn csv_document(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Simple aligned `key value` table.
pub fn table_document(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    out
}
