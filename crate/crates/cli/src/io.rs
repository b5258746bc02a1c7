//! File formats owned by the command-line front end: series input, forecast
//! tables and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use fm2i_core::bench::{parse_dataset, MethodForecasts};
use fm2i_core::{Category, TimeSeries};
use serde::Serialize;

pub const VERSION: &str = concat!("fm2i ", env!("CARGO_PKG_VERSION"));

/// Read series from either the dataset schema
/// (`id,category,period,horizon,n,v0,...`) or a bare list of numbers, one
/// or more per line, with an optional non-numeric header line.
pub fn load_series(path: &Path) -> Result<Vec<TimeSeries>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.to_ascii_lowercase().starts_with("id,"))
        .unwrap_or("");
    let fields: Vec<&str> = first.split(',').collect();
    if fields.len() >= 6 && fields[1].trim().parse::<Category>().is_ok() {
        return Ok(parse_dataset(&text)?.series);
    }

    let mut values = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens.iter().map(|t| t.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>() {
            Ok(v) => values.extend(v),
            Err(_) if values.is_empty() && no == 0 => continue,
            Err(e) => {
                return Err(fm2i_core::Error::Schema(vec![fm2i_core::error::RowError {
                    line: no + 1,
                    message: format!("not a number: {e}"),
                }])
                .into())
            }
        }
    }
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    Ok(vec![TimeSeries::new(id, values)?])
}

/// `id,step,value` with 1-based steps.
pub fn forecast_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a [f64])>) -> String {
    let mut out = String::from("id,step,value\n");
    for (id, values) in rows {
        for (k, v) in values.iter().enumerate() {
            out.push_str(&format!("{id},{},{v}\n", k + 1));
        }
    }
    out
}

/// Parse an `id,step,value` file into per-id forecasts ordered by step.
pub fn read_forecast_csv(path: &Path) -> Result<MethodForecasts> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut steps: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    let mut errors = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (no == 0 && line.starts_with("id")) {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = (f.len() == 3)
            .then(|| Some((f[0], f[1].parse::<usize>().ok()?, f[2].parse::<f64>().ok()?)))
            .flatten();
        match parsed {
            Some((id, step, v)) if step >= 1 && v.is_finite() => {
                steps.entry(id.to_string()).or_default().insert(step, v);
            }
            _ => errors.push(fm2i_core::error::RowError {
                line: no + 1,
                message: format!("{}: expected id,step,value", path.display()),
            }),
        }
    }
    if !errors.is_empty() {
        return Err(fm2i_core::Error::Schema(errors).into());
    }
    let mut out = MethodForecasts::new();
    for (id, s) in steps {
        let expected: Vec<usize> = (1..=s.len()).collect();
        if s.keys().copied().collect::<Vec<_>>() != expected {
            bail!(fm2i_core::Error::Schema(vec![fm2i_core::error::RowError {
                line: 0,
                message: format!("{}: steps of {id} are not 1..={}", path.display(), s.len()),
            }]));
        }
        out.insert(id, s.into_values().collect());
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    pub timestamp_unix: u64,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, inputs: Vec<PathBuf>, output: &Path) -> Self {
        RunManifest {
            command: command.into(),
            config,
            inputs,
            output: output.to_path_buf(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            version: VERSION,
            seed: None,
            threads: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}
