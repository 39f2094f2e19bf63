//! Config files, flag merging and caps.

use std::path::Path;

use anyhow::{bail, Context, Result};
use conjpair::Caps;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const CACHE_ENV: &str = "CONJPAIR_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".conjpair-cache";

pub fn load(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if !value.is_object() {
        bail!("{} must hold a JSON object", path.display());
    }
    Ok(value)
}

/// Fills every flag the user left out from the config file.
///
/// Keys are the camelCase field names; keys a subcommand does not know are
/// ignored so that one file can serve several subcommands.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Value>) -> Result<T> {
    let mut merged: Map<String, Value> = match file {
        Some(Value::Object(m)) => m.clone(),
        _ => Map::new(),
    };
    let Value::Object(explicit) = serde_json::to_value(flags)? else {
        bail!("flags must serialize to an object");
    };
    for (key, v) in explicit {
        if !v.is_null() {
            merged.insert(key, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).context("invalid configuration")
}

/// Caps from the optional `"caps"` object of the config file. Raising any
/// cap above its default requires `unsafe_caps`.
pub fn caps(file: Option<&Value>, unsafe_caps: bool) -> Result<Caps> {
    let defaults = Caps::default();
    let Some(overrides) = file.and_then(|f| f.get("caps")) else {
        return Ok(defaults);
    };
    let Value::Object(overrides) = overrides else {
        bail!("\"caps\" must be an object");
    };
    let mut base = serde_json::to_value(defaults)?;
    let base_map = base.as_object_mut().expect("caps serialize to an object");
    for (key, v) in overrides {
        if !base_map.contains_key(key) {
            bail!("unknown cap {key:?}");
        }
        base_map.insert(key.clone(), v.clone());
    }
    let caps: Caps = serde_json::from_value(base).context("invalid caps")?;
    let raised = serde_json::to_value(caps)?
        .as_object()
        .unwrap()
        .iter()
        .filter(|(k, v)| v.as_u64() > serde_json::to_value(defaults).unwrap()[k.as_str()].as_u64())
        .map(|(k, _)| k.clone())
        .collect::<Vec<_>>();
    if !raised.is_empty() && !unsafe_caps {
        bail!("raising {} above the default needs --unsafe-caps", raised.join(", "));
    }
    Ok(caps)
}
