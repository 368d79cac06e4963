//! `--config` support: every subcommand accepts a JSON file whose keys match
//! its long flag names; explicit flags override the file.

use std::path::{Path, PathBuf};

use poclab_core::{Error, Result};
use serde::de::DeserializeOwned;

/// Loads a JSON config file into the subcommand's defaults struct.
pub fn load<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(display(p), e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::invalid(format!("config {}: {e}", display(p))))
        }
    }
}

/// Flag value if given, else the config value, else an error naming the flag.
pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T> {
    flag.or(config)
        .ok_or_else(|| Error::invalid(format!("missing --{name} (or config key `{name}`)")))
}

/// Flag value if given, else the config value, else a default.
pub fn or_default<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Writes `content` to `--out` when given, stdout otherwise.
pub fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::io(display(path), e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Parses a comma-separated list of floats.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad grid value `{tok}`")))
        })
        .collect()
}
