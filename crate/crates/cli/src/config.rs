//! Parameter resolution: defaults, then `--config` file, then explicit flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// The resolved configuration embedded in every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub seed: u64,
    pub params: Value,
}

/// Shape of a `--config` file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub subcommand: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

/// Reads a config file. A `result.json` written by an earlier run is also
/// accepted; its embedded `config` object is used, so runs can be replayed.
pub fn load_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let invalid = |e: serde_json::Error| CliError::config(format!("invalid config {}: {e}", path.display()));
    let mut value: Value = serde_json::from_str(&text).map_err(invalid)?;
    if let Value::Object(m) = &mut value {
        if m.contains_key("result") {
            if let Some(cfg) = m.remove("config") {
                value = cfg;
            }
        }
    }
    serde_json::from_value(value).map_err(invalid)
}

fn overlay(base: &mut Map<String, Value>, top: Map<String, Value>) {
    for (k, v) in top {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
}

fn as_object<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value).expect("parameter structs serialize") {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

/// Merge `defaults < file < flags` and deserialize, rejecting unknown keys.
pub fn resolve<P>(defaults: &P, file: Option<&ConfigFile>, flags: &P) -> Result<P, CliError>
where
    P: Serialize + DeserializeOwned,
{
    let mut merged = as_object(defaults);
    if let Some(f) = file {
        overlay(&mut merged, f.params.clone());
    }
    overlay(&mut merged, as_object(flags));
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::config(format!("invalid parameters: {e}")))
}
