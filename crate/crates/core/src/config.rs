//! Run parameters with their default values.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::prep::{AdfConfig, PreprocessConfig, StationarityConfig, DEFAULT_WEIGHT_CUTOFF};
use crate::var::{InfoCriterion, LagSearchConfig, ShockSize};

/// Which standard deviation rescales a cumulative effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// The window's series after preprocessing, before differencing.
    #[default]
    Raw,
    /// The series actually fed to the VAR.
    Differenced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub max_lag: usize,
    pub ic: InfoCriterion,
    /// Ljung-Box significance for residual whiteness.
    pub whiteness_alpha: f64,
    /// ADF significance for stationarity.
    pub adf_significance: f64,
    pub adf: AdfConfig,
    pub weight_cutoff: f64,
    pub min_retained_fraction: f64,
    /// Period shifts in days; 0 is the unshifted window.
    pub shifts: Vec<i64>,
    /// Longest nested window, in years.
    pub max_m: u32,
    pub irf_horizon: usize,
    pub weekly_adjustment: bool,
    pub shock_size: ShockSize,
    pub sigma_mode: SigmaMode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            max_lag: 15,
            ic: InfoCriterion::Aic,
            whiteness_alpha: 0.10,
            adf_significance: 0.05,
            adf: AdfConfig::default(),
            weight_cutoff: DEFAULT_WEIGHT_CUTOFF,
            min_retained_fraction: 0.5,
            shifts: vec![0, 30, 61, 91],
            max_m: 4,
            irf_horizon: 60,
            weekly_adjustment: false,
            shock_size: ShockSize::StdDev,
            sigma_mode: SigmaMode::Raw,
        }
    }
}

impl AnalysisConfig {
    pub fn lag_search(&self) -> LagSearchConfig {
        LagSearchConfig { max_lag: self.max_lag, ic: self.ic, whiteness_alpha: self.whiteness_alpha }
    }

    pub fn stationarity(&self) -> StationarityConfig {
        StationarityConfig {
            adf: self.adf,
            significance: self.adf_significance,
            weight_cutoff: self.weight_cutoff,
            min_retained_fraction: self.min_retained_fraction,
        }
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig { weekly_adjustment: self.weekly_adjustment }
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::MiaoError::Invalid;
        if self.max_lag == 0 {
            return Err(Invalid("max_lag must be at least 1".into()));
        }
        if self.max_m == 0 {
            return Err(Invalid("max_m must be at least 1".into()));
        }
        if self.shifts.is_empty() || self.shifts.iter().any(|s| *s < 0) {
            return Err(Invalid("shifts must be a non-empty list of non-negative day counts".into()));
        }
        for (name, v) in [("whiteness_alpha", self.whiteness_alpha), ("adf_significance", self.adf_significance)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Invalid(format!("{name} must lie in (0, 1)")));
            }
        }
        if !(self.weight_cutoff > 0.0) || !(0.0..=1.0).contains(&self.min_retained_fraction) {
            return Err(Invalid("weight_cutoff must be positive and min_retained_fraction in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub max_depth: usize,
    /// Smallest share of the total sample weight a leaf may hold.
    pub min_leaf_share: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { max_depth: 3, min_leaf_share: 0.01 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub series_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub paths: Paths,
    pub analysis: AnalysisConfig,
    pub classifier: ClassifierConfig,
    /// Seed for simulation commands; the analysis itself draws no randomness.
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { paths: Paths::default(), analysis: AnalysisConfig::default(), classifier: ClassifierConfig::default(), seed: 20240101, threads: None }
    }
}
