//! Declarative run configuration.
//!
//! A single TOML file describes a whole run: input paths, split
//! boundaries, significance levels, the interval engine's knobs, and the
//! shifting policy. Command-line flags override individual keys, and the
//! `CARBONBOUND_WORKSPACE` environment variable overrides the workspace
//! root. Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::conformal::SpciConfig;
use crate::forecast::ForecasterSpec;
use crate::shiftsim::ShiftPolicy;
use crate::timeseries::{HourlyStamp, RegionId};

/// Environment variable naming the workspace root.
pub const WORKSPACE_ENV: &str = "CARBONBOUND_WORKSPACE";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory all normalized data and reports are written under.
    #[serde(default = "default_workspace")]
    pub workspace: PathBuf,
    /// Significance levels evaluated per run.
    pub alphas: Vec<f64>,
    /// Shift policy as text: `point`, `dominance`, or `overlap:THETA`.
    #[serde(default = "default_policy")]
    pub policy: String,
    /// Cluster peak power applied to the normalized trace.
    #[serde(default = "default_peak_mw")]
    pub peak_mw: f64,
    /// Count misleading pairs the way the aggregate-table captions read
    /// (source predicted lower but truly higher) instead of the
    /// worked-example direction.
    #[serde(default)]
    pub misleading_as_captioned: bool,
    /// Emission factor file; required when any region derives truth from
    /// an energy mix.
    pub factors: Option<PathBuf>,
    /// Normalized power trace file; required by the shift subcommand.
    pub power: Option<PathBuf>,
    pub split: SplitConfig,
    #[serde(default)]
    pub forecaster: ForecasterConfig,
    #[serde(default)]
    pub spci: SpciConfig,
    pub regions: Vec<RegionConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train_end: HourlyStamp,
    pub calibration_end: HourlyStamp,
    pub test_end: HourlyStamp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecasterConfig {
    /// `seasonal_naive_24h`, `same_hour_last_week`, or `moving_average`.
    #[serde(default = "default_forecaster_kind")]
    pub kind: String,
    /// Window length for `moving_average`.
    #[serde(default = "default_ma_window")]
    pub k: usize,
    /// Horizon of batches produced by the `forecast` subcommand.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        ForecasterConfig {
            kind: default_forecaster_kind(),
            k: default_ma_window(),
            horizon: default_horizon(),
        }
    }
}

impl ForecasterConfig {
    pub fn spec(&self) -> Result<ForecasterSpec, String> {
        match self.kind.as_str() {
            "seasonal_naive_24h" => Ok(ForecasterSpec::SeasonalNaive24h),
            "same_hour_last_week" => Ok(ForecasterSpec::SameHourLastWeek),
            "moving_average" => {
                if self.k == 0 {
                    return Err("moving_average needs k >= 1".into());
                }
                Ok(ForecasterSpec::MovingAverage { k: self.k })
            }
            other => Err(format!(
                "unknown forecaster {other:?}; expected seasonal_naive_24h, same_hour_last_week, or moving_average"
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub code: RegionId,
    /// Ground-truth carbon intensity file. May be omitted when `mix` is
    /// given, in which case truth is derived from the mix and factors.
    pub truth: Option<PathBuf>,
    /// Energy source mix file.
    pub mix: Option<PathBuf>,
    /// Externally produced point forecast batches.
    pub forecasts: Option<PathBuf>,
}

fn default_workspace() -> PathBuf {
    PathBuf::from("workspace")
}

fn default_policy() -> String {
    "dominance".into()
}

fn default_peak_mw() -> f64 {
    20.0
}

fn default_forecaster_kind() -> String {
    "seasonal_naive_24h".into()
}

fn default_ma_window() -> usize {
    24
}

fn default_horizon() -> usize {
    24
}

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub workspace: Option<PathBuf>,
    pub regions: Vec<String>,
    pub alphas: Vec<f64>,
    pub policy: Option<String>,
    pub seed: Option<u64>,
}

impl PipelineConfig {
    /// Load, resolve relative paths against the config directory, apply
    /// the environment and flag overrides, and validate everything before
    /// any data is touched.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut config: PipelineConfig =
            toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))?;

        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);

        if let Ok(env_workspace) = std::env::var(WORKSPACE_ENV) {
            config.workspace = PathBuf::from(env_workspace);
        }
        config.apply(overrides)?;
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        resolve(&mut self.workspace);
        if let Some(p) = self.factors.as_mut() {
            resolve(p);
        }
        if let Some(p) = self.power.as_mut() {
            resolve(p);
        }
        for region in &mut self.regions {
            for p in [&mut region.truth, &mut region.mix, &mut region.forecasts]
                .into_iter()
                .flatten()
            {
                resolve(p);
            }
        }
    }

    fn apply(&mut self, overrides: &Overrides) -> Result<(), String> {
        if let Some(workspace) = &overrides.workspace {
            self.workspace = workspace.clone();
        }
        if !overrides.regions.is_empty() {
            let keep: Vec<String> = overrides.regions.clone();
            self.regions
                .retain(|r| keep.iter().any(|k| k == r.code.as_str()));
            for code in &keep {
                if !self.regions.iter().any(|r| r.code.as_str() == code) {
                    return Err(format!("--region {code} is not defined in the config"));
                }
            }
        }
        if !overrides.alphas.is_empty() {
            self.alphas = overrides.alphas.clone();
        }
        if let Some(policy) = &overrides.policy {
            self.policy = policy.clone();
        }
        if let Some(seed) = overrides.seed {
            self.spci.seed = seed;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.alphas.is_empty() {
            return Err("alphas must name at least one significance level".into());
        }
        for &alpha in &self.alphas {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(format!("alpha {alpha} outside (0, 1)"));
            }
        }
        if !(self.split.train_end < self.split.calibration_end
            && self.split.calibration_end < self.split.test_end)
        {
            return Err(format!(
                "split boundaries must satisfy train_end < calibration_end < test_end, got {} / {} / {}",
                self.split.train_end, self.split.calibration_end, self.split.test_end
            ));
        }
        if self.regions.is_empty() {
            return Err("at least one [[regions]] entry is required".into());
        }
        for region in &self.regions {
            if region.truth.is_none() && region.mix.is_none() {
                return Err(format!(
                    "region {} needs a truth file or a mix file",
                    region.code
                ));
            }
            if region.truth.is_none() && self.factors.is_none() {
                return Err(format!(
                    "region {} derives truth from its mix, which requires a factors file",
                    region.code
                ));
            }
        }
        if !(self.peak_mw.is_finite() && self.peak_mw > 0.0) {
            return Err(format!("peak_mw must be positive, got {}", self.peak_mw));
        }
        self.policy()?;
        self.forecaster.spec()?;
        self.spci.validate().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn policy(&self) -> Result<ShiftPolicy, String> {
        self.policy.parse()
    }

    pub fn region(&self, code: &str) -> Option<&RegionConfig> {
        self.regions.iter().find(|r| r.code.as_str() == code)
    }
}
