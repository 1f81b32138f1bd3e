//! Augmented Dickey-Fuller unit-root test.
//!
//! Regression: `Δy_t = α [+ βt] + γ y_{t-1} + Σ_{i=1..L} φ_i Δy_{t-i} + e_t`.
//! The lag order `L` minimizes AIC over `0..=L_max` on a common sample,
//! with `L_max = ⌊12 (T/100)^{1/4}⌋`; the chosen model is then refit on all
//! usable observations. p-values come from MacKinnon's response surface.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::mackinnon::mackinnon_p;
use crate::error::{MiaoError, Result};
use crate::linalg::least_squares;

pub const MIN_ADF_LEN: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    #[default]
    Constant,
    ConstantTrend,
}

impl Deterministic {
    fn terms(self) -> usize {
        match self {
            Deterministic::Constant => 1,
            Deterministic::ConstantTrend => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AdfConfig {
    pub deterministic: Deterministic,
    /// Overrides the Schwert bound when set.
    pub max_lag: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    pub nobs: usize,
}

/// `⌊12 (T/100)^{1/4}⌋`.
pub fn schwert_max_lag(len: usize) -> usize {
    (12.0 * (len as f64 / 100.0).powf(0.25)).floor() as usize
}

pub fn adf_test(values: &[f64]) -> Result<AdfResult> {
    adf_test_with(values, &AdfConfig::default())
}

struct Design {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

/// Rows use `Δy_j` for `j` in `first..len-1` (`Δy_j = y_{j+1} - y_j`).
fn design(values: &[f64], diffs: &[f64], lags: usize, first: usize, det: Deterministic) -> Design {
    let rows = diffs.len() - first;
    let k = 1 + det.terms() + lags;
    let mut x = DMatrix::<f64>::zeros(rows, k);
    let mut y = DMatrix::<f64>::zeros(rows, 1);
    for r in 0..rows {
        let j = first + r;
        y[(r, 0)] = diffs[j];
        x[(r, 0)] = values[j];
        x[(r, 1)] = 1.0;
        if det == Deterministic::ConstantTrend {
            x[(r, 2)] = (j + 1) as f64;
        }
        for l in 1..=lags {
            x[(r, det.terms() + l)] = diffs[j - l];
        }
    }
    Design { x, y }
}

pub fn adf_test_with(values: &[f64], cfg: &AdfConfig) -> Result<AdfResult> {
    let n = values.len();
    if n < MIN_ADF_LEN {
        return Err(MiaoError::TooShort { needed: MIN_ADF_LEN, got: n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MiaoError::Invalid("non-finite value in series".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= f64::EPSILON * mean.abs().max(1.0) * 1e-3 {
        return Err(MiaoError::Degenerate("constant series".into()));
    }
    let det = cfg.deterministic;
    let cap = (n / 2).saturating_sub(det.terms() + 1);
    let max_lag = cfg.max_lag.unwrap_or_else(|| schwert_max_lag(n)).min(cap);
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();

    // AIC on the common sample that every candidate lag can use.
    let full = design(values, &diffs, max_lag, max_lag, det);
    let rows = full.y.nrows() as f64;
    let mut best = (f64::INFINITY, 0usize);
    for lag in 0..=max_lag {
        let k = 1 + det.terms() + lag;
        let x = full.x.columns(0, k).into_owned();
        let fit = match least_squares(&x, &full.y) {
            Ok(f) => f,
            Err(MiaoError::Collinear) => continue,
            Err(e) => return Err(e),
        };
        let ssr = fit.ssr(0);
        if ssr <= 0.0 {
            continue;
        }
        let aic = rows * (ssr / rows).ln() + 2.0 * k as f64;
        if aic < best.0 {
            best = (aic, lag);
        }
    }
    if !best.0.is_finite() {
        return Err(MiaoError::Degenerate("no usable ADF regression (perfect fit or collinear)".into()));
    }
    let lags = best.1;
    let d = design(values, &diffs, lags, lags, det);
    let fit = least_squares(&d.x, &d.y).map_err(|e| match e {
        MiaoError::Collinear => MiaoError::Degenerate("collinear ADF regression".into()),
        e => e,
    })?;
    let nobs = d.y.nrows();
    let dof = nobs - d.x.ncols();
    let sigma2 = fit.ssr(0) / dof as f64;
    if !(sigma2 > 0.0) {
        return Err(MiaoError::Degenerate("ADF regression has zero residual variance".into()));
    }
    let se = (sigma2 * fit.gram_inverse_diag()[0]).sqrt();
    let statistic = fit.coef[(0, 0)] / se;
    Ok(AdfResult { statistic, p_value: mackinnon_p(statistic, det), lags_used: lags, nobs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(seed: u64, n: usize, phi: f64) -> Vec<f64> {
        let e = noise(seed, n);
        let mut x = vec![0.0; n];
        for t in 1..n {
            x[t] = phi * x[t - 1] + e[t];
        }
        x
    }

    #[test]
    fn schwert_bound() {
        assert_eq!(schwert_max_lag(100), 12);
        assert_eq!(schwert_max_lag(1000), 21);
        assert_eq!(schwert_max_lag(365), 16);
    }

    #[test]
    fn constant_is_degenerate() {
        assert!(matches!(adf_test(&[3.0; 100]), Err(MiaoError::Degenerate(_))));
    }

    #[test]
    fn too_short() {
        assert!(matches!(adf_test(&[1.0, 2.0, 3.0]), Err(MiaoError::TooShort { .. })));
    }

    #[test]
    fn ar_half_rejected() {
        let mut rejected = 0;
        for seed in 0..40 {
            if adf_test(&ar1(seed, 1000, 0.5)).unwrap().p_value < 0.05 {
                rejected += 1;
            }
        }
        assert!(rejected >= 38, "{rejected}/40");
    }

    #[test]
    fn random_walk_statistic_larger_than_white_noise() {
        // aggregate ordering over a batch of seeds
        let mut rw = 0.0;
        let mut wn = 0.0;
        for seed in 100..130 {
            rw += adf_test(&ar1(seed, 500, 1.0)).unwrap().statistic;
            wn += adf_test(&noise(seed, 500)).unwrap().statistic;
        }
        assert!(rw > wn);
    }

    #[test]
    fn p_value_in_unit_interval() {
        for seed in 0..10 {
            let r = adf_test(&ar1(seed, 200, 0.9)).unwrap();
            assert!((0.0..=1.0).contains(&r.p_value));
            assert!(r.lags_used <= schwert_max_lag(200));
        }
    }

    #[test]
    fn trend_variant_runs() {
        let cfg = AdfConfig { deterministic: Deterministic::ConstantTrend, max_lag: Some(4) };
        let x: Vec<f64> = ar1(3, 400, 0.3).iter().enumerate().map(|(t, v)| v + 0.05 * t as f64).collect();
        let r = adf_test_with(&x, &cfg).unwrap();
        assert!(r.p_value < 0.05);
        assert_eq!(r.nobs, 399 - r.lags_used);
    }
}
