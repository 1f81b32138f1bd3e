use serde::{Deserialize, Serialize};

use super::adf::{adf_test_with, AdfConfig, AdfResult};
use super::frac_diff::{ffd_width, frac_diff_with, DEFAULT_WEIGHT_CUTOFF};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityConfig {
    pub adf: AdfConfig,
    /// ADF p-value below which a series counts as stationary.
    pub significance: f64,
    pub weight_cutoff: f64,
    /// Differencing orders whose warm-up would leave less than this fraction
    /// of the input are skipped.
    pub min_retained_fraction: f64,
}

impl Default for StationarityConfig {
    fn default() -> Self {
        Self { adf: AdfConfig::default(), significance: 0.05, weight_cutoff: DEFAULT_WEIGHT_CUTOFF, min_retained_fraction: 0.5 }
    }
}

/// A series ready for VAR estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySeries {
    pub values: Vec<f64>,
    /// 0 when the input passed the ADF test untransformed.
    pub frac_order: f64,
    /// Leading input points consumed by differencing.
    pub warm_up: usize,
    /// ADF result on the untransformed input.
    pub initial_adf: AdfResult,
    /// ADF result on `values`.
    pub final_adf: AdfResult,
    /// No order in the grid reached stationarity; `frac_order` fell back to 1.
    pub exhausted: bool,
}

/// The grid `0.1, 0.2, …, 1.0`.
pub fn d_grid() -> impl Iterator<Item = f64> {
    (1..=10).map(|i| i as f64 / 10.0)
}

/// Smallest grid order whose differenced series rejects a unit root.
///
/// Intended for inputs that failed the ADF test. Falls back to `d = 1`
/// with `exhausted` set when no order qualifies.
pub fn min_stationary_d(values: &[f64], cfg: &StationarityConfig) -> Result<StationarySeries> {
    let initial = adf_test_with(values, &cfg.adf)?;
    scan(values, initial, cfg)
}

fn scan(values: &[f64], initial: AdfResult, cfg: &StationarityConfig) -> Result<StationarySeries> {
    let min_len = ((values.len() as f64) * cfg.min_retained_fraction).ceil() as usize;
    for d in d_grid() {
        let width = ffd_width(d, cfg.weight_cutoff);
        if values.len() + 1 < width + min_len.max(1) {
            continue;
        }
        let out = frac_diff_with(values, d, cfg.weight_cutoff)?;
        let adf = adf_test_with(&out, &cfg.adf)?;
        if adf.p_value < cfg.significance {
            return Ok(StationarySeries { values: out, frac_order: d, warm_up: width - 1, initial_adf: initial, final_adf: adf, exhausted: false });
        }
    }
    let out = frac_diff_with(values, 1.0, cfg.weight_cutoff)?;
    let adf = adf_test_with(&out, &cfg.adf)?;
    Ok(StationarySeries { values: out, frac_order: 1.0, warm_up: 1, initial_adf: initial, final_adf: adf, exhausted: true })
}

/// Tests, then differences only when a unit root is not rejected.
pub fn make_stationary(values: &[f64], cfg: &StationarityConfig) -> Result<StationarySeries> {
    let initial = adf_test_with(values, &cfg.adf)?;
    if initial.p_value < cfg.significance {
        return Ok(StationarySeries { values: values.to_vec(), frac_order: 0.0, warm_up: 0, initial_adf: initial, final_adf: initial, exhausted: false });
    }
    scan(values, initial, cfg)
}
