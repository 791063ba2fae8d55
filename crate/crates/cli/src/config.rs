//! Config files: a JSON object holding the global keys `seed`, `out`,
//! `format` and `threads` next to the options of the chosen subcommand.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::args::{Format, Global};
use crate::CliError;

/// Global settings after merging flags over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

pub struct Loaded {
    pub settings: Settings,
    /// Subcommand options from the file.
    pub options: Map<String, Value>,
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(path.display().to_string(), e))
}

pub fn load(global: &Global) -> Result<Loaded, CliError> {
    let mut options = match &global.config {
        None => Map::new(),
        Some(path) => match read_json(path)? {
            Value::Object(m) => m,
            _ => return Err(CliError::invalid("config", "expected a JSON object")),
        },
    };
    let mut take = |key: &str| options.remove(key);
    let seed = match take("seed") {
        None => None,
        Some(v) => Some(field::<u64>("seed", v)?),
    };
    let out = match take("out") {
        None => None,
        Some(v) => Some(field::<PathBuf>("out", v)?),
    };
    let format = match take("format") {
        None => None,
        Some(v) => Some(field::<Format>("format", v)?),
    };
    let threads = match take("threads") {
        None => None,
        Some(v) => Some(field::<usize>("threads", v)?),
    };
    let threads = global.threads.or(threads);
    if threads == Some(0) {
        return Err(CliError::invalid("threads", "must be at least 1"));
    }
    Ok(Loaded {
        settings: Settings {
            seed: global.seed.or(seed).unwrap_or(0),
            out: global.out.clone().or(out),
            format: global.format.or(format).unwrap_or_default(),
            threads,
        },
        options,
    })
}

fn field<T: DeserializeOwned>(name: &str, v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::invalid(name, e))
}

/// Deserialize subcommand options; unknown keys are rejected by name.
pub fn options<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::invalid("config", e))
}
