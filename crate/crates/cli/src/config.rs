//! Config files: a JSON object with the same keys as a subcommand's flags.
//! Flags given on the command line override the file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Fills every unset option with its documented default.
pub trait Defaults {
    fn with_defaults(self) -> Self;
}

pub fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))? {
        Value::Object(map) => Ok(map),
        _ => bail!("config {} must be a JSON object", path.display()),
    }
}

/// `file ⊕ flags`, flags winning; unknown keys in the file are rejected.
pub fn resolve<T>(flags: T, file: Option<&Map<String, Value>>) -> Result<T>
where
    T: Serialize + DeserializeOwned + Defaults,
{
    let Value::Object(flag_map) = serde_json::to_value(&flags)? else {
        bail!("flags did not serialize to an object");
    };
    let mut merged = Map::new();
    if let Some(file) = file {
        for (k, v) in file {
            if k == "command" {
                continue;
            }
            if !flag_map.contains_key(k) {
                let known: Vec<&str> = flag_map.keys().map(String::as_str).collect();
                bail!("unknown config key `{k}` (known: {})", known.join(", "));
            }
            merged.insert(k.clone(), v.clone());
        }
    }
    for (k, v) in flag_map {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    let resolved: T = serde_json::from_value(Value::Object(merged)).context("invalid config value")?;
    Ok(resolved.with_defaults())
}
