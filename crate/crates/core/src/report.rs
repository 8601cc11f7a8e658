//! CSV artifacts: a `# ` line carrying a JSON header, then a plain CSV table.
//! Readers skip the header line, so every file is re-parseable.

use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Run metadata echoed into every artifact header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    /// `git describe` of the build, when known.
    pub git: Option<String>,
    /// Seconds since the Unix epoch; the only field that varies between reruns.
    pub created: u64,
}

impl Provenance {
    pub fn new(command: &str, config: serde_json::Value, git: Option<String>) -> Self {
        let created = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Provenance { command: command.to_string(), version: env!("CARGO_PKG_VERSION").to_string(), config, git, created }
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

/// Header line plus one CSV record per row, columns in field order.
pub fn write_csv<H: Serialize, T: Serialize>(header: &H, rows: &[T]) -> Result<String> {
    let head = serde_json::to_string(header).map_err(|e| Error::Parameter(format!("unserializable header: {e}")))?;
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let body = String::from_utf8(body).expect("csv output is utf-8");
    Ok(format!("# {head}\n{body}"))
}

/// Inverse of [`write_csv`]. The JSON header is optional.
pub fn read_csv<T: DeserializeOwned>(text: &str) -> Result<(Option<serde_json::Value>, Vec<T>)> {
    let (header, body) = match text.strip_prefix("# ") {
        Some(rest) => {
            let (h, b) = rest.split_once('\n').unwrap_or((rest, ""));
            let v = serde_json::from_str(h).map_err(|e| Error::Parse { line: 1, msg: format!("bad header: {e}") })?;
            (Some(v), b)
        }
        None => (None, text),
    };
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(body.as_bytes());
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(csv_error)?;
    Ok((header, rows))
}

/// The part of an artifact after the header line.
pub fn csv_body(text: &str) -> &str {
    if text.starts_with("# ") {
        text.split_once('\n').map_or("", |(_, b)| b)
    } else {
        text
    }
}
