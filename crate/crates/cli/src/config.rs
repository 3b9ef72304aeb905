//! Experiment configuration: TOML file values merged with command-line
//! flags, flags winning. The master seed is mandatory and never defaults to
//! wall-clock time.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

/// Configuration mistakes exit with code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()).into())
}

/// TOML file layout; every field optional, sections keyed by subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub calib: Option<PathBuf>,
    #[serde(default)]
    pub sweep: SweepFile,
    #[serde(default)]
    pub configs: ConfigsFile,
    #[serde(default)]
    pub assemble: AssembleFile,
    #[serde(default)]
    pub heatmap: HeatmapFile,
    #[serde(default)]
    pub bench: BenchFile,
    #[serde(default)]
    pub synth_calib: SynthCalibFile,
    #[serde(default)]
    pub topology: TopologyFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub sizes: Option<Vec<usize>>,
    pub steps: Option<Vec<f64>>,
    pub sigmas: Option<Vec<f64>>,
    pub batch: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigsFile {
    pub chiplet: Option<usize>,
    pub dims: Option<Vec<String>>,
    pub batch: Option<usize>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssembleFile {
    pub chiplet: Option<usize>,
    pub dims: Option<String>,
    pub batch: Option<usize>,
    pub sigma: Option<f64>,
    pub ratio: Option<f64>,
    pub max_reconfig: Option<u32>,
    pub export_mcms: Option<usize>,
    pub bond_sensitivity: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapFile {
    pub chiplets: Option<Vec<usize>>,
    pub dims: Option<Vec<usize>>,
    pub ratios: Option<Vec<f64>>,
    pub batch: Option<usize>,
    pub sigma: Option<f64>,
    pub max_reconfig: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchFile {
    pub families: Option<Vec<String>>,
    pub chiplet: Option<usize>,
    pub dims: Option<String>,
    pub ratio: Option<f64>,
    pub batch: Option<usize>,
    pub sigma: Option<f64>,
    pub max_reconfig: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthCalibFile {
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub edges: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub chiplet: Option<usize>,
    pub dims: Option<String>,
    pub monolithic: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                match toml::from_str(&text) {
                    Ok(cfg) => Ok(cfg),
                    Err(e) => config_error(format!("config file {}: {e}", path.display())),
                }
            }
        }
    }
}

/// Flag value beats file value.
pub fn merge<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    match value {
        Some(v) => Ok(v),
        None => config_error(format!("{what} is required (flag or config file)")),
    }
}

/// `KxM` dims string, e.g. `2x3`.
pub fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() == 2 {
        if let (Ok(k), Ok(m)) = (parts[0].trim().parse(), parts[1].trim().parse()) {
            if k >= 1 && m >= 1 {
                return Ok((k, m));
            }
        }
    }
    config_error(format!("bad dims {s:?}; expected KxM with K, M >= 1"))
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os("QMCM_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("qmcm-out"))
}

pub fn validate_batch(batch: usize) -> Result<usize> {
    if batch == 0 {
        return config_error("batch must be at least 1");
    }
    if batch > 100_000_000 {
        return config_error("batch larger than 1e8 is not supported");
    }
    Ok(batch)
}

pub fn validate_sigma(sigma: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma < 0.0 || sigma > 1.0 {
        return config_error(format!("sigma {sigma} outside [0, 1] GHz"));
    }
    Ok(sigma)
}

pub fn validate_ratio(ratio: f64) -> Result<f64> {
    if !ratio.is_finite() || ratio <= 0.0 || ratio > 1000.0 {
        return config_error(format!("link ratio {ratio} outside (0, 1000]"));
    }
    Ok(ratio)
}
