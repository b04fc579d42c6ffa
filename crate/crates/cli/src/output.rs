use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use tailpool::error::{Error, Result};
use tailpool::io::round_json;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// `{"schema_version", "command", "report"}` with numbers rounded.
pub fn envelope(command: &str, report: &impl Serialize) -> Result<Value> {
    let report = serde_json::to_value(report)?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "report": round_json(report),
    }))
}

pub fn write_json(value: &Value, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(&text, path)
}

pub fn write_text(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}
