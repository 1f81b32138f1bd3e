//! Run configuration: optional TOML file, then command-line overrides.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use miao_core::config::{RunConfig, SigmaMode};
use miao_core::var::{InfoCriterion, ShockSize};

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Largest VAR lag tried.
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Lag selection criterion: aic, bic or hqic.
    #[arg(long, value_parser = parse_ic)]
    pub ic: Option<InfoCriterion>,
    /// Ljung-Box significance for residual whiteness.
    #[arg(long)]
    pub whiteness_alpha: Option<f64>,
    /// ADF significance for stationarity.
    #[arg(long)]
    pub adf_significance: Option<f64>,
    /// Period shifts in days, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub shifts: Option<Vec<i64>>,
    /// Longest nested window in years.
    #[arg(long)]
    pub max_m: Option<u32>,
    #[arg(long)]
    pub irf_horizon: Option<usize>,
    /// Subtract day-of-week means before testing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub weekly_adjustment: Option<bool>,
    /// Structural shock size: unit or std_dev.
    #[arg(long, value_parser = parse_shock)]
    pub shock_size: Option<ShockSize>,
    /// Series spread used to normalize effects: raw or differenced.
    #[arg(long, value_parser = parse_sigma)]
    pub sigma_mode: Option<SigmaMode>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_leaf_share: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_ic(s: &str) -> Result<InfoCriterion, String> {
    match s.to_ascii_lowercase().as_str() {
        "aic" => Ok(InfoCriterion::Aic),
        "bic" => Ok(InfoCriterion::Bic),
        "hqic" => Ok(InfoCriterion::Hqic),
        _ => Err(format!("unknown criterion `{s}` (aic, bic, hqic)")),
    }
}

fn parse_shock(s: &str) -> Result<ShockSize, String> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "unit" => Ok(ShockSize::Unit),
        "std_dev" | "sd" => Ok(ShockSize::StdDev),
        _ => Err(format!("unknown shock size `{s}` (unit, std_dev)")),
    }
}

fn parse_sigma(s: &str) -> Result<SigmaMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "raw" => Ok(SigmaMode::Raw),
        "differenced" => Ok(SigmaMode::Differenced),
        _ => Err(format!("unknown sigma mode `{s}` (raw, differenced)")),
    }
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let a = &mut cfg.analysis;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(a.max_lag, self.max_lag);
        set!(a.ic, self.ic);
        set!(a.whiteness_alpha, self.whiteness_alpha);
        set!(a.adf_significance, self.adf_significance);
        set!(a.shifts, self.shifts);
        set!(a.max_m, self.max_m);
        set!(a.irf_horizon, self.irf_horizon);
        set!(a.weekly_adjustment, self.weekly_adjustment);
        set!(a.shock_size, self.shock_size);
        set!(a.sigma_mode, self.sigma_mode);
        set!(cfg.classifier.max_depth, self.max_depth);
        set!(cfg.classifier.min_leaf_share, self.min_leaf_share);
        set!(cfg.seed, self.seed);
    }
}

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub fn resolve(path: Option<&Path>, overrides: &Overrides, threads: Option<usize>) -> Result<RunConfig> {
    let mut cfg = load(path)?;
    overrides.apply(&mut cfg);
    if threads.is_some() {
        cfg.threads = threads;
    }
    cfg.analysis.validate()?;
    if cfg.classifier.max_depth == 0 || !(0.0..0.5).contains(&cfg.classifier.min_leaf_share) {
        bail!("max_depth must be at least 1 and min_leaf_share in [0, 0.5)");
    }
    Ok(cfg)
}

pub fn to_toml(cfg: &RunConfig) -> Result<String> {
    Ok(toml::to_string_pretty(cfg)?)
}
