//! Parameter resolution: command-line flag, then config file, then default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub struct Params {
    config: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
    inputs: BTreeMap<String, String>,
}

impl Params {
    /// Reads a JSON object of parameters. A run manifest also works: its
    /// `params` object is used, so a manifest can be replayed as a config.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let config = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", p.display())))?;
                match v {
                    Value::Object(mut m) => match m.remove("params") {
                        Some(Value::Object(inner)) => inner,
                        Some(_) => return Err(CliError::Usage("config `params` must be an object".into())),
                        None => m,
                    },
                    _ => return Err(CliError::Usage("config must be a JSON object".into())),
                }
            }
        };
        Ok(Params {
            config,
            resolved: BTreeMap::new(),
            inputs: BTreeMap::new(),
        })
    }

    fn config_value<T>(&self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let text = match self.config.get(key) {
            None | Some(Value::Null) => return Ok(None),
            Some(Value::String(s)) => s.clone(),
            Some(v @ (Value::Number(_) | Value::Bool(_))) => v.to_string(),
            Some(_) => return Err(CliError::Usage(format!("config key `{key}` must be a string or number"))),
        };
        text.parse()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
    }

    /// Flag if given, else config entry, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.config_value(key)? {
                Some(v) => v,
                None => default.ok_or_else(|| {
                    CliError::Usage(format!("missing `--{}` (or `{key}` in the config)", key.replace('_', "-")))
                })?,
            },
        };
        self.resolved.insert(key.to_string(), json_scalar(&value.to_string()));
        Ok(value)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => self.config_value(key)?,
        };
        self.resolved.insert(
            key.to_string(),
            value.as_ref().map_or(Value::Null, |v| json_scalar(&v.to_string())),
        );
        Ok(value)
    }

    /// Like [`Params::get`] for an input file path, also listed as an input.
    pub fn input(&mut self, key: &str, flag: Option<String>) -> CliResult<String> {
        let path = self.get(key, flag, None)?;
        self.inputs.insert(key.to_string(), path.clone());
        Ok(path)
    }

    pub fn optional_input(&mut self, key: &str, flag: Option<String>) -> CliResult<Option<String>> {
        let path = self.optional(key, flag)?;
        if let Some(p) = &path {
            self.inputs.insert(key.to_string(), p.clone());
        }
        Ok(path)
    }

    pub fn resolved(&self) -> &BTreeMap<String, Value> {
        &self.resolved
    }

    pub fn inputs(&self) -> &BTreeMap<String, String> {
        &self.inputs
    }
}

/// Integers and reals become JSON numbers, everything else a string.
fn json_scalar(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(u) = s.parse::<u64>() {
        return Value::from(u);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() => Value::from(f),
        _ => Value::from(s),
    }
}
