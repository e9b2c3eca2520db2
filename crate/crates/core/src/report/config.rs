//! Run configuration for `fit`.
//!
//! ```toml
//! inflation_window = 10.0
//! regime_tolerance = 1e-9
//! blocks = 4
//!
//! [curve]
//! horizon = 100.0
//! points = 101
//! engine = "closed-form"
//!
//! [mc]
//! paths = 20000
//! seed = 42
//!
//! [countries.USA]
//! nominal = "data/usa_nominal.csv"
//! cpi = "data/usa_cpi.csv"
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analytics::DEFAULT_REGIME_TOL;
use crate::error::{Error, Result};
use crate::estimator::{EstimatorOptions, DEFAULT_BLOCKS};
use crate::montecarlo::DEFAULT_MAX_PATH_STEPS;
use crate::pipeline::DEFAULT_INFLATION_WINDOW;

use super::Engine;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountrySpec {
    pub nominal: PathBuf,
    pub cpi: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSettings {
    pub horizon: f64,
    pub points: usize,
    pub engine: Engine,
}

impl Default for CurveSettings {
    fn default() -> Self {
        Self { horizon: 100.0, points: 101, engine: Engine::ClosedForm }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSettings {
    pub paths: usize,
    pub seed: u64,
    /// Simulation step in units of the correlation time.
    pub dt_alpha: f64,
    pub max_path_steps: u128,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { paths: 20_000, seed: 42, dt_alpha: 1.0 / 32.0, max_path_steps: DEFAULT_MAX_PATH_STEPS }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_window")]
    pub inflation_window: f64,
    #[serde(default = "default_tol")]
    pub regime_tolerance: f64,
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    #[serde(default)]
    pub max_lag: Option<f64>,
    #[serde(default)]
    pub curve: CurveSettings,
    #[serde(default)]
    pub mc: McSettings,
    pub countries: BTreeMap<String, CountrySpec>,
}

fn default_window() -> f64 {
    DEFAULT_INFLATION_WINDOW
}

fn default_tol() -> f64 {
    DEFAULT_REGIME_TOL
}

fn default_blocks() -> usize {
    DEFAULT_BLOCKS
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for spec in cfg.countries.values_mut() {
            if spec.nominal.is_relative() {
                spec.nominal = base_dir.join(&spec.nominal);
            }
            if spec.cpi.is_relative() {
                spec.cpi = base_dir.join(&spec.cpi);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn validate(&self) -> Result<()> {
        if self.countries.is_empty() {
            return Err(Error::Parse("config lists no countries".into()));
        }
        if !(self.curve.horizon > 0.0) {
            return Err(Error::Domain(format!("curve horizon must be > 0, got {}", self.curve.horizon)));
        }
        if self.curve.points < 2 {
            return Err(Error::Domain("curve needs at least 2 points".into()));
        }
        if !(self.regime_tolerance >= 0.0) {
            return Err(Error::Domain("regime tolerance must be >= 0".into()));
        }
        Ok(())
    }

    pub fn estimator_options(&self) -> EstimatorOptions {
        EstimatorOptions { max_lag: self.max_lag, n_blocks: self.blocks, regime_tol: self.regime_tolerance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_resolves_paths() {
        let text = "[countries.USA]\nnominal = \"a.csv\"\ncpi = \"/abs/b.csv\"\n";
        let cfg = RunConfig::parse(text, Path::new("/data")).unwrap();
        assert_eq!(cfg.inflation_window, 10.0);
        assert_eq!(cfg.blocks, 4);
        assert_eq!(cfg.curve.engine, Engine::ClosedForm);
        let usa = &cfg.countries["USA"];
        assert_eq!(usa.nominal, PathBuf::from("/data/a.csv"));
        assert_eq!(usa.cpi, PathBuf::from("/abs/b.csv"));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse("inflation_window = 10\n", Path::new(".")).is_err());
        let unknown = "colour = 1\n[countries.X]\nnominal = \"a\"\ncpi = \"b\"\n";
        assert!(RunConfig::parse(unknown, Path::new(".")).is_err());
        let bad_horizon = "[curve]\nhorizon = -1.0\n[countries.X]\nnominal = \"a\"\ncpi = \"b\"\n";
        assert!(RunConfig::parse(bad_horizon, Path::new(".")).is_err());
    }

    #[test]
    fn full_config() {
        let text = r#"
inflation_window = 5.0
regime_tolerance = 1e-6
blocks = 3
max_lag = 12.5

[curve]
horizon = 50.0
points = 11
engine = "both"

[mc]
paths = 1000
seed = 7

[countries.A]
nominal = "a_n.csv"
cpi = "a_c.csv"

[countries.B]
nominal = "b_n.csv"
cpi = "b_c.csv"
"#;
        let cfg = RunConfig::parse(text, Path::new("")).unwrap();
        assert_eq!(cfg.curve.engine, Engine::Both);
        assert_eq!(cfg.mc.paths, 1000);
        assert_eq!(cfg.mc.dt_alpha, 1.0 / 32.0);
        assert_eq!(cfg.countries.keys().collect::<Vec<_>>(), vec!["A", "B"]);
        assert_eq!(cfg.estimator_options().max_lag, Some(12.5));
    }
}
