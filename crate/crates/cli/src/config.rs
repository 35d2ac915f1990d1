//! The `key = value` configuration file and its flag overrides.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use meanscope_core::{AnalysisConfig, L1Mode, QuadRule};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub analysis: AnalysisConfig,
    /// Verdict tolerance.
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            analysis: AnalysisConfig::default(),
            tol: 0.02,
            format: Format::Text,
            out: None,
        }
    }
}

/// Every key the file accepts, in the order they are documented.
pub const KEYS: [&str; 18] = [
    "abs_tol",
    "rel_tol",
    "max_subdivisions",
    "rule",
    "x_start",
    "window_growth",
    "window_count",
    "samples_per_window",
    "window_tol",
    "theta_start",
    "theta_growth",
    "theta_steps",
    "theta_tol",
    "l1_mode",
    "tower_k_max",
    "tol",
    "format",
    "out",
];

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses `key = value` lines. Blank lines and lines starting with `#`
    /// are skipped; unknown keys and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = CliConfig::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected `key = value`", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(CliError::Usage(format!(
                    "line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
            cfg.set(key, value)
                .map_err(|m| CliError::Usage(format!("line {}: {m}", i + 1)))?;
            seen.push(key);
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let a = &mut self.analysis;
        match key {
            "abs_tol" => a.quadrature.abs_tol = num(key, value)?,
            "rel_tol" => a.quadrature.rel_tol = num(key, value)?,
            "max_subdivisions" => a.quadrature.max_subdivisions = int(key, value)?,
            "rule" => {
                a.quadrature.rule = match value {
                    "gk15" => QuadRule::GaussKronrod15,
                    "gk21" => QuadRule::GaussKronrod21,
                    _ => return Err(format!("`rule` must be gk15 or gk21, got `{value}`")),
                }
            }
            "x_start" => a.windows.x_start = num(key, value)?,
            "window_growth" => a.windows.growth = num(key, value)?,
            "window_count" => a.windows.window_count = int(key, value)?,
            "samples_per_window" => a.windows.samples_per_window = int(key, value)?,
            "window_tol" => a.windows.stabilization_tol = num(key, value)?,
            "theta_start" => a.thetas.theta_start = num(key, value)?,
            "theta_growth" => a.thetas.growth = num(key, value)?,
            "theta_steps" => a.thetas.max_steps = int(key, value)?,
            "theta_tol" => a.thetas.stabilization_tol = num(key, value)?,
            "l1_mode" => {
                a.l1_mode = match value {
                    "direct" => L1Mode::Direct,
                    "via-w" => L1Mode::ViaW,
                    _ => return Err(format!("`l1_mode` must be direct or via-w, got `{value}`")),
                }
            }
            "tower_k_max" => a.tower_k_max = int(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "format" => {
                self.format = Format::from_str(value, false)
                    .map_err(|_| format!("`format` must be json, csv or text, got `{value}`"))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

fn num(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))
}

fn int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("`{key}` expects a non-negative integer, got `{value}`"))
}
