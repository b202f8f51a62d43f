//! Run configuration: command-line flags merged over an optional key-value file.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// The resolved parameters of one invocation, embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunConfig {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    pub params: Value,
}

impl RunConfig {
    pub fn new(command: &str, params: &impl Serialize) -> Result<Self, CliError> {
        Ok(RunConfig {
            format_version: CONFIG_FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            params: serde_json::to_value(params).map_err(|e| CliError::Usage(e.to_string()))?,
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Fills unset flags from a TOML file. Keys are flag names with `-` or `_`.
/// A flag given on the command line wins; `false` switches count as unset.
pub fn merge_file<T: Serialize + DeserializeOwned>(
    args: T,
    file: Option<&Path>,
) -> Result<T, CliError> {
    let Some(path) = file else {
        return Ok(args);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let mut merged = Map::new();
    for (k, v) in table {
        let v = serde_json::to_value(v).map_err(|e| CliError::Usage(e.to_string()))?;
        merged.insert(k.replace('-', "_"), v);
    }
    let Value::Object(cli) =
        serde_json::to_value(&args).map_err(|e| CliError::Usage(e.to_string()))?
    else {
        return Err(CliError::Usage("arguments are not a table".into()));
    };
    let known: Vec<String> = cli.keys().cloned().collect();
    if let Some(bad) = merged.keys().find(|k| !known.contains(k)) {
        return Err(CliError::Usage(format!(
            "unknown config key `{bad}` in {}",
            path.display()
        )));
    }
    for (k, v) in cli {
        let unset = matches!(v, Value::Null | Value::Bool(false))
            || matches!(&v, Value::Array(a) if a.is_empty());
        if !unset || !merged.contains_key(&k) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}
