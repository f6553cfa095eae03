//! Flag/config-file merging and the `resolved-config.json` record.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const RESOLVED_CONFIG: &str = "resolved-config.json";

/// Frequency band given as `<ghz>:<ghz>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Band {
    pub lo_ghz: f64,
    pub hi_ghz: f64,
}

impl Band {
    pub fn new(lo_ghz: f64, hi_ghz: f64) -> Self {
        Self { lo_ghz, hi_ghz }
    }

    pub fn hz(&self) -> (f64, f64) {
        (self.lo_ghz * 1e9, self.hi_ghz * 1e9)
    }
}

impl FromStr for Band {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) =
            s.split_once(':').ok_or_else(|| format!("band `{s}` must look like <ghz>:<ghz>"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("band `{s}`: `{x}` is not a number"))
        };
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

impl TryFrom<String> for Band {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Band> for String {
    fn from(b: Band) -> String {
        b.to_string()
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo_ghz, self.hi_ghz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Touchstone,
    Json,
    Svg,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Touchstone => "touchstone",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Reads the parameter object of a config file. Both a bare object and a
/// `resolved-config.json` record (`{"command": …, "config": {…}}`) are
/// accepted; a record written by another command is rejected.
fn load_config(command: &str, path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::input(format!("{}: config must be a JSON object", path.display())));
    };
    if let Some(Value::Object(inner)) = obj.remove("config") {
        match obj.get("command").and_then(Value::as_str) {
            Some(c) if c != command => Err(CliError::input(format!(
                "{}: config was written by `{c}`, not `{command}`",
                path.display()
            ))),
            _ => Ok(inner),
        }
    } else {
        obj.remove("command");
        Ok(obj)
    }
}

/// Overlays the flags that were given on top of the config file.
pub fn merge<T>(command: &str, flags: &T, config: Option<&Path>) -> CliResult<T>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged = match config {
        Some(p) => load_config(command, p)?,
        None => Map::new(),
    };
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::input(format!("invalid configuration: {e}")))
}

/// Writes `resolved-config.json` in the directory of `out`.
pub fn write_resolved<T: Serialize>(command: &str, resolved: &T, out: &Path) -> CliResult<PathBuf> {
    let dir = out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let path = dir.join(RESOLVED_CONFIG);
    let record = serde_json::json!({ "command": command, "config": resolved });
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Writes an output file, creating its directory if needed.
pub fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::input(format!("missing required --{flag}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_round_trips_through_text() {
        let b: Band = "3:7.25".parse().unwrap();
        assert_eq!(b, Band::new(3.0, 7.25));
        assert_eq!(b.to_string().parse::<Band>().unwrap(), b);
        assert_eq!(b.hz(), (3e9, 7.25e9));
        assert!("3-7".parse::<Band>().is_err());
        assert!("a:7".parse::<Band>().is_err());
    }

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Demo {
        points: Option<usize>,
        band: Option<Band>,
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"points": 5, "band": "1:2"}"#).unwrap();
        let flags = Demo { points: Some(9), band: None };
        let m = merge("demo", &flags, Some(&path)).unwrap();
        assert_eq!(m.points, Some(9));
        assert_eq!(m.band, Some(Band::new(1.0, 2.0)));
    }

    #[test]
    fn resolved_record_is_reloadable_and_checked() {
        let dir = tempfile::tempdir().unwrap();
        let resolved = Demo { points: Some(3), band: Some(Band::new(3.0, 7.0)) };
        let path = write_resolved("demo", &resolved, &dir.path().join("out.csv")).unwrap();
        let back: Demo = merge("demo", &Demo::default(), Some(&path)).unwrap();
        assert_eq!(back, resolved);
        assert!(merge::<Demo>("other", &Demo::default(), Some(&path)).is_err());
    }

    #[test]
    fn unknown_keys_are_input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"pionts": 5}"#).unwrap();
        let err = merge::<Demo>("demo", &Demo::default(), Some(&path)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
