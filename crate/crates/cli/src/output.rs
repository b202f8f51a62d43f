//! Tidy CSV files with a `#` metadata header, and JSON documents.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// CSV text: `# mft <version>`, `# config <json>`, then a header row and records.
pub fn csv_string<R: Serialize>(config: &RunConfig, rows: &[R]) -> Result<String, CliError> {
    let mut out = Vec::new();
    writeln!(out, "# mft {}", config.tool_version).expect("write to memory");
    writeln!(out, "# config {}", config.to_json_line()).expect("write to memory");
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Data(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

pub fn write_csv<R: Serialize>(
    path: &Path,
    config: &RunConfig,
    rows: &[R],
) -> Result<(), CliError> {
    write_text(path, &csv_string(config, rows)?)
}

/// Reads a file written by [`write_csv`], skipping the metadata lines.
pub fn read_csv<R: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<R>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    reader
        .deserialize()
        .collect::<Result<Vec<R>, _>>()
        .map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn json_string(value: &impl Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
