//! Resolution of command settings: flags over the config file over defaults.
//!
//! The config file is TOML with one table per command, e.g. `[train]` or
//! `[nav.centrality]`. Scalar keys of a parent table (`[nav]`) apply to every
//! subcommand that has them. Keys use the flag names with underscores.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub const DATA_DIR_ENV: &str = "SCICONNAV_DATA_DIR";

/// Bad invocation; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn load_config(path: Option<&Path>) -> Result<Option<toml::Table>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config `{}`", path.display()))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| usage(format!("bad config `{}`: {e}", path.display())))?;
    Ok(Some(table))
}

/// Merges defaults, the config tables along `section`, and the given flags.
/// Flags that were not passed (null or `false`) do not override.
pub fn resolve<C>(section: &[&str], config: Option<&toml::Table>, flags: &impl Serialize) -> Result<C>
where
    C: Default + Serialize + DeserializeOwned,
{
    let mut merged = serde_json::to_value(C::default())?;
    let obj = merged.as_object_mut().expect("settings serialize as a map");
    if let Some(mut table) = config {
        for (depth, key) in section.iter().enumerate() {
            let Some(next) = table.get(*key).and_then(toml::Value::as_table) else {
                break;
            };
            let last = depth + 1 == section.len();
            for (k, v) in next {
                if v.is_table() && !last {
                    continue;
                }
                if !obj.contains_key(k) {
                    if last {
                        return Err(usage(format!("unknown key `{k}` in config table [{}]", section.join("."))));
                    }
                    continue;
                }
                obj.insert(k.clone(), serde_json::to_value(v)?);
            }
            table = next;
        }
    }
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !matches!(v, Value::Null | Value::Bool(false)) {
                obj.insert(k, v);
            }
        }
    }
    serde_json::from_value(merged).map_err(|e| usage(format!("invalid settings for {}: {e}", section.join(" "))))
}

pub fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value.as_deref().ok_or_else(|| usage(format!("missing required --{flag}")))
}

pub fn require_str<'a>(value: &'a Option<String>, flag: &str) -> Result<&'a str> {
    value.as_deref().ok_or_else(|| usage(format!("missing required --{flag}")))
}

pub fn absolutize(value: &mut Option<PathBuf>) -> Result<()> {
    if let Some(p) = value {
        *p = std::path::absolute(&*p)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    struct Settings {
        dim: usize,
        seed: u64,
        out: Option<PathBuf>,
        fast: bool,
    }

    #[derive(Serialize)]
    struct Flags {
        dim: Option<usize>,
        seed: Option<u64>,
        out: Option<PathBuf>,
        fast: bool,
    }

    fn table(text: &str) -> toml::Table {
        text.parse().unwrap()
    }

    #[test]
    fn flags_beat_config_beat_defaults() {
        let cfg = table("[train]\ndim = 8\nseed = 3\n");
        let flags = Flags {
            dim: None,
            seed: Some(9),
            out: None,
            fast: false,
        };
        let s: Settings = resolve(&["train"], Some(&cfg), &flags).unwrap();
        assert_eq!((s.dim, s.seed, s.out, s.fast), (8, 9, None, false));
        let s: Settings = resolve(&["train"], None, &flags).unwrap();
        assert_eq!((s.dim, s.seed), (0, 9));
    }

    #[test]
    fn parent_scalars_apply_and_unknown_keys_fail() {
        let cfg = table("[nav]\ndim = 4\nother = 1\n[nav.path]\nseed = 2\n");
        let none = Flags {
            dim: None,
            seed: None,
            out: None,
            fast: false,
        };
        let s: Settings = resolve(&["nav", "path"], Some(&cfg), &none).unwrap();
        assert_eq!((s.dim, s.seed), (4, 2));
        let bad = table("[nav.path]\nbogus = 2\n");
        let err = resolve::<Settings>(&["nav", "path"], Some(&bad), &none).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }
}
