//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};

/// Keys accepted in a config file.
pub const KEYS: [&str; 17] = [
    "L", "dx", "dt", "t_end", "tol", "p", "a", "delta", "plane", "xrange", "yrange", "nx", "ny",
    "log", "with_pde", "k2", "r",
];

/// Extra key for the output directory.
pub const OUT_KEY: &str = "out";

/// Input the user can fix; reported with the usage exit status.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Usage(format!("reading config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Usage(format!("in config {}: {e:#}", path.display())).into())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim();
            if key != OUT_KEY && !KEYS.contains(&key) {
                bail!("line {}: unknown key {key:?}", lineno + 1);
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Usage(format!("config key {key} = {v:?}: {e}")).into())
            })
            .transpose()
    }

    pub fn out_dir(&self) -> Option<PathBuf> {
        self.values.get(OUT_KEY).map(PathBuf::from)
    }
}

/// `flag`, else `file`, else `default`.
pub fn layered<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(file.get(key)?.unwrap_or(default)),
    }
}

/// Output directory: flag, then `WAVESPEED_OUT`, then config file, then `.`.
pub fn output_dir(flag: Option<PathBuf>, file: &FileConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os("WAVESPEED_OUT").map(PathBuf::from))
        .or_else(|| file.out_dir())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// A closed interval written `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range(pub f64, pub f64);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Range(parse(lo)?, parse(hi)?))
    }
}
