use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] waveqft_core::Error),

    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> &str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Config { .. } => "cli.config",
            CliError::Io(_) => "cli.io",
            CliError::Usage(_) => "cli.usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(_) | CliError::Io(_) => 1,
            CliError::Config { .. } | CliError::Usage(_) => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut err = Map::new();
        err.insert("code".into(), self.code().into());
        err.insert("message".into(), self.to_string().into());
        if let CliError::Config { field, .. } = self {
            err.insert("field".into(), field.clone().into());
        }
        serde_json::json!({ "error": err })
    }

    pub fn config(field: &str, message: impl Display) -> Self {
        CliError::Config { field: field.to_string(), message: message.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Option values after merging flags, config file and defaults; every lookup is echoed.
#[derive(Debug, Default)]
pub struct Resolver {
    file: Map<String, Value>,
    pub echo: Map<String, Value>,
}

impl Resolver {
    /// Loads `path` and checks that its keys are options of `command`.
    pub fn load(path: Option<&Path>, command: &str, known: &BTreeSet<String>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Resolver::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let Value::Object(mut file) = value else {
            return Err(CliError::config("config", "top level must be an object"));
        };
        if let Some(c) = file.remove("command") {
            if c.as_str() != Some(command) {
                return Err(CliError::config("command", format!("config is for '{}', invoked '{command}'", c.as_str().unwrap_or("?"))));
            }
        }
        file.remove("description");
        if let Some(bad) = file.keys().find(|k| !known.contains(k.as_str())) {
            return Err(CliError::config(bad, format!("unknown option for '{command}'")));
        }
        Ok(Resolver { file, echo: Map::new() })
    }

    fn from_file(&self, key: &str) -> Option<String> {
        self.file.get(key).map(|v| match v {
            Value::String(s) => s.clone(),
            Value::Array(items) => items.iter().map(value_text).collect::<Vec<_>>().join(","),
            other => value_text(other),
        })
    }

    /// Flag value, else the config entry, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.from_file(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s.parse::<T>().map_err(|e| CliError::config(key, e))?,
            (None, None) => default,
        };
        self.echo.insert(key.to_string(), Value::String(value.to_string()));
        Ok(value)
    }

    pub fn get_str(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<String> {
        self.get(key, flag, default.to_string())
    }

    /// Like [`Resolver::get`] with no default; absent values are not echoed.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.from_file(key)) {
            (Some(v), _) => Some(v),
            (None, Some(s)) => Some(s.parse::<T>().map_err(|e| CliError::config(key, e))?),
            (None, None) => None,
        };
        if let Some(v) = &value {
            self.echo.insert(key.to_string(), Value::String(v.to_string()));
        }
        Ok(value)
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool> {
        let value = if flag {
            true
        } else {
            match self.file.get(key) {
                None => false,
                Some(Value::Bool(b)) => *b,
                Some(other) => return Err(CliError::config(key, format!("expected a boolean, got {other}"))),
            }
        };
        self.echo.insert(key.to_string(), Value::Bool(value));
        Ok(value)
    }

    /// Parses with `FromStr` into a non-`Display` type such as a core enum.
    pub fn parse<T>(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let s = self.get_str(key, flag, default)?;
        s.parse::<T>().map_err(|e| CliError::config(key, e))
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn split_range(item: &str) -> Option<(&str, &str, Option<&str>)> {
    let (a, rest) = item.split_once("..")?;
    match rest.split_once(':') {
        Some((b, s)) => Some((a, b, Some(s))),
        None => Some((a, rest, None)),
    }
}

fn num<T: FromStr>(field: &str, s: &str) -> Result<T>
where
    T::Err: Display,
{
    s.trim().parse::<T>().map_err(|e| CliError::config(field, format!("'{s}': {e}")))
}

fn non_empty<T>(field: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        Err(CliError::config(field, "range is empty"))
    } else {
        Ok(v)
    }
}

/// `a,b`, `a..b` (inclusive) and `a..b:step` integer lists.
pub fn uint_list(field: &str, spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
        match split_range(item) {
            None => out.push(num(field, item)?),
            Some((a, b, step)) => {
                let (a, b): (usize, usize) = (num(field, a)?, num(field, b)?);
                let step: usize = step.map(|s| num(field, s)).transpose()?.unwrap_or(1);
                if step == 0 {
                    return Err(CliError::config(field, "step must be positive"));
                }
                out.extend((a..=b).step_by(step));
            }
        }
    }
    non_empty(field, out)
}

pub fn u32_list(field: &str, spec: &str) -> Result<Vec<u32>> {
    uint_list(field, spec)?
        .into_iter()
        .map(|x| u32::try_from(x).map_err(|e| CliError::config(field, e)))
        .collect()
}

/// Like [`uint_list`], except that a range keeps only its powers of two.
pub fn pow2_list(field: &str, spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
        match split_range(item) {
            None => out.push(num(field, item)?),
            Some((a, b, None)) => {
                let (a, b): (usize, usize) = (num(field, a)?, num(field, b)?);
                out.extend((0..usize::BITS).map(|j| 1usize << j).filter(|p| (a..=b).contains(p)));
            }
            Some(_) => return Err(CliError::config(field, "power-of-two ranges take no step")),
        }
    }
    non_empty(field, out)
}

/// `x,y`, `a..b:step` (inclusive up to rounding) and `a..b` (11 points) float lists.
pub fn float_list(field: &str, spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
        match split_range(item) {
            None => out.push(num(field, item)?),
            Some((a, b, step)) => {
                let (a, b): (f64, f64) = (num(field, a)?, num(field, b)?);
                let h = match step {
                    Some(s) => num(field, s)?,
                    None => (b - a) / 10.0,
                };
                if !(h > 0.0) && !(step.is_none() && a == b) {
                    return Err(CliError::config(field, format!("'{item}' is empty or has a non-positive step")));
                }
                let count = if h > 0.0 { ((b - a) / h + 1e-9).floor() as usize + 1 } else { 1 };
                out.extend((0..count).map(|i| {
                    let x = a + i as f64 * h;
                    if (x - b).abs() < 1e-9 * h { b } else { x }
                }));
            }
        }
    }
    non_empty(field, out)
}
