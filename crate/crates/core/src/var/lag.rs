//! Lag-order search: information criteria, residual whiteness and the
//! constrained choice between them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::model::{fit_var_ols, lagged_design};
use crate::error::{MiaoError, Result};
use crate::linalg::{log_det_spd, solve_normal_equations};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoCriterion {
    #[default]
    Aic,
    Bic,
    Hqic,
}

impl InfoCriterion {
    pub fn name(self) -> &'static str {
        match self {
            InfoCriterion::Aic => "AIC",
            InfoCriterion::Bic => "BIC",
            InfoCriterion::Hqic => "HQIC",
        }
    }
}

/// Criterion values for lags `1..=max_lag` (index 0 is lag 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcTable {
    pub aic: Vec<f64>,
    pub bic: Vec<f64>,
    pub hqic: Vec<f64>,
    /// Observations shared by every lag.
    pub nobs: usize,
}

impl IcTable {
    pub fn get(&self, ic: InfoCriterion) -> &[f64] {
        match ic {
            InfoCriterion::Aic => &self.aic,
            InfoCriterion::Bic => &self.bic,
            InfoCriterion::Hqic => &self.hqic,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.aic.len()
    }

    /// Lag minimizing `ic` (ties go to the smaller lag).
    pub fn argmin(&self, ic: InfoCriterion) -> usize {
        let v = self.get(ic);
        let mut best = 0;
        for (i, x) in v.iter().enumerate() {
            if *x < v[best] {
                best = i;
            }
        }
        best + 1
    }
}

/// Largest lag not exceeding `max_lag` that leaves enough observations.
pub fn feasible_max_lag(len: usize, n: usize, max_lag: usize) -> usize {
    let mut q = max_lag;
    while q > 0 && len.saturating_sub(q) <= n * q + 1 {
        q -= 1;
    }
    q
}

/// All three criteria on the common sample `max_lag..T`.
///
/// `log det Σ̂ + penalty · (p n² + n) / T_eff` with `Σ̂` the ML residual
/// covariance and penalty 2, `ln T_eff`, `2 ln ln T_eff` for AIC, BIC, HQIC.
pub fn information_criteria_table<T: Scalar>(data: &DMatrix<T>, max_lag: usize) -> Result<IcTable> {
    let n = data.ncols();
    if max_lag == 0 {
        return Err(MiaoError::Invalid("max_lag must be at least 1".into()));
    }
    if data.nrows() <= max_lag || data.nrows() - max_lag <= n * max_lag + 1 {
        return Err(MiaoError::TooShort { needed: max_lag + n * max_lag + 2, got: data.nrows() });
    }
    let (x, y) = lagged_design(data, max_lag, max_lag);
    let xt = x.transpose();
    let gram = &xt * &x;
    let xty = &xt * &y;
    let yty = y.transpose() * &y;
    let nobs = y.nrows();
    let tf = nobs as f64;
    let mut table = IcTable { aic: Vec::new(), bic: Vec::new(), hqic: Vec::new(), nobs };
    for q in 1..=max_lag {
        let k = 1 + n * q;
        let g = gram.view((0, 0), (k, k)).into_owned();
        let c = xty.rows(0, k).into_owned();
        let b = solve_normal_equations(&g, &c)?;
        let mut sse = &yty - c.transpose() * &b;
        for i in 0..n {
            for j in 0..i {
                let v = (sse[(i, j)] + sse[(j, i)]) * T::lit(0.5);
                sse[(i, j)] = v;
                sse[(j, i)] = v;
            }
        }
        let sigma = sse / T::from_count(nobs);
        let ld = log_det_spd(&sigma).map_err(|_| MiaoError::Collinear)?.as_f64();
        let free = (q * n * n + n) as f64;
        table.aic.push(ld + 2.0 * free / tf);
        table.bic.push(ld + tf.ln() * free / tf);
        table.hqic.push(ld + 2.0 * tf.ln().ln() * free / tf);
    }
    Ok(table)
}

pub fn information_criteria<T: Scalar>(data: &DMatrix<T>, max_lag: usize, ic: InfoCriterion) -> Result<Vec<f64>> {
    Ok(information_criteria_table(data, max_lag)?.get(ic).to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBox {
    pub statistic: f64,
    pub p_value: f64,
    pub lags: usize,
    pub df: usize,
}

/// Test lags used for a VAR of order `var_lag`: 10 below lag 10, twice the lag otherwise.
pub fn ljung_box_lags(var_lag: usize) -> usize {
    if var_lag < 10 {
        10
    } else {
        2 * var_lag
    }
}

/// Ljung-Box Q against χ² with `lags - model_df` degrees of freedom (at least 1).
pub fn ljung_box_series(x: &[f64], lags: usize, model_df: usize) -> Result<LjungBox> {
    let n = x.len();
    if lags == 0 || n <= lags {
        return Err(MiaoError::TooShort { needed: lags + 1, got: n });
    }
    let df = lags.saturating_sub(model_df).max(1);
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = c.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return Ok(LjungBox { statistic: 0.0, p_value: 1.0, lags, df });
    }
    let nf = n as f64;
    let mut q = 0.0;
    for k in 1..=lags {
        let r: f64 = c[k..].iter().zip(&c[..n - k]).map(|(a, b)| a * b).sum::<f64>() / denom;
        q += r * r / (nf - k as f64);
    }
    q *= nf * (nf + 2.0);
    let chi = ChiSquared::new(df as f64).map_err(|e| MiaoError::Invalid(e.to_string()))?;
    Ok(LjungBox { statistic: q, p_value: chi.sf(q), lags, df })
}

/// Per-equation Ljung-Box results, aggregated by the smallest p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Whiteness {
    pub per_equation: Vec<LjungBox>,
}

impl Whiteness {
    pub fn min_p(&self) -> f64 {
        self.per_equation.iter().map(|r| r.p_value).fold(f64::INFINITY, f64::min)
    }

    /// The equation with the smallest p-value.
    pub fn worst(&self) -> Option<&LjungBox> {
        self.per_equation.iter().min_by(|a, b| a.p_value.total_cmp(&b.p_value))
    }
}

pub fn ljung_box<T: Scalar>(residuals: &DMatrix<T>, max_lag_order: usize, model_lag: usize) -> Result<Whiteness> {
    let per_equation = (0..residuals.ncols())
        .map(|j| {
            let col: Vec<f64> = residuals.column(j).iter().map(|v| v.as_f64()).collect();
            ljung_box_series(&col, max_lag_order, model_lag)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Whiteness { per_equation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagCandidate {
    pub ic_value: f64,
    pub lag: usize,
    pub whiteness_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub histories: Vec<LagCandidate>,
    pub chosen: usize,
    /// No candidate passed the whiteness test; `chosen` has the largest p-value.
    pub degraded: bool,
}

/// Smallest criterion among candidates whose residuals pass whiteness at
/// `alpha`; otherwise the candidate with the largest whiteness p-value.
pub fn best_lag(histories: Vec<LagCandidate>, alpha: f64) -> Result<LagSelection> {
    if histories.is_empty() {
        return Err(MiaoError::Invalid("empty lag history".into()));
    }
    let feasible = histories
        .iter()
        .filter(|h| h.whiteness_p >= alpha)
        .min_by(|a, b| a.ic_value.total_cmp(&b.ic_value).then(a.lag.cmp(&b.lag)));
    let (chosen, degraded) = match feasible {
        Some(h) => (h.lag, false),
        None => {
            let h = histories
                .iter()
                .max_by(|a, b| a.whiteness_p.total_cmp(&b.whiteness_p).then(b.ic_value.total_cmp(&a.ic_value)).then(b.lag.cmp(&a.lag)))
                .expect("non-empty");
            (h.lag, true)
        }
    };
    Ok(LagSelection { histories, chosen, degraded })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagSearchConfig {
    pub max_lag: usize,
    pub ic: InfoCriterion,
    /// Ljung-Box significance; residuals with p below this are serially correlated.
    pub whiteness_alpha: f64,
}

impl Default for LagSearchConfig {
    fn default() -> Self {
        Self { max_lag: 15, ic: InfoCriterion::Aic, whiteness_alpha: 0.10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSearch {
    pub selection: LagSelection,
    pub criteria: IcTable,
    /// Whiteness of each candidate, aligned with `selection.histories`.
    pub whiteness: Vec<Whiteness>,
}

impl LagSearch {
    pub fn chosen_whiteness(&self) -> &Whiteness {
        &self.whiteness[self.selection.chosen - 1]
    }
}

/// Evaluates every lag up to the (feasible) maximum and picks one.
pub fn select_lag<T: Scalar>(data: &DMatrix<T>, cfg: &LagSearchConfig) -> Result<LagSearch> {
    let max_lag = feasible_max_lag(data.nrows(), data.ncols(), cfg.max_lag);
    if max_lag == 0 {
        return Err(MiaoError::TooShort { needed: data.ncols() + 3, got: data.nrows() });
    }
    let criteria = information_criteria_table(data, max_lag)?;
    let values = criteria.get(cfg.ic);
    let mut histories = Vec::with_capacity(max_lag);
    let mut whiteness = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let model = fit_var_ols(data, lag)?;
        let w = ljung_box(&model.residuals, ljung_box_lags(lag), lag)?;
        histories.push(LagCandidate { ic_value: values[lag - 1], lag, whiteness_p: w.min_p() });
        whiteness.push(w);
    }
    let selection = best_lag(histories, cfg.whiteness_alpha)?;
    Ok(LagSearch { selection, criteria, whiteness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn cand(ic: f64, lag: usize, p: f64) -> LagCandidate {
        LagCandidate { ic_value: ic, lag, whiteness_p: p }
    }

    #[test]
    fn constraint_binds() {
        let s = best_lag(vec![cand(5.0, 2, 0.02), cand(5.3, 4, 0.40)], 0.10).unwrap();
        assert_eq!((s.chosen, s.degraded), (4, false));
    }

    #[test]
    fn min_ic_among_feasible() {
        let s = best_lag(vec![cand(5.0, 2, 0.40), cand(4.0, 6, 0.40)], 0.10).unwrap();
        assert_eq!(s.chosen, 6);
    }

    #[test]
    fn fallback_to_whitest() {
        let s = best_lag(vec![cand(1.0, 1, 0.01), cand(2.0, 2, 0.07), cand(0.5, 3, 0.03)], 0.10).unwrap();
        assert_eq!((s.chosen, s.degraded), (2, true));
        assert!(best_lag(vec![], 0.1).is_err());
    }

    #[test]
    fn test_lag_rule() {
        assert_eq!(ljung_box_lags(1), 10);
        assert_eq!(ljung_box_lags(7), 10);
        assert_eq!(ljung_box_lags(10), 20);
        assert_eq!(ljung_box_lags(15), 30);
    }

    #[test]
    fn ljung_box_hand_computed() {
        // x = [1, -1, 1, -1, 0]: mean 0, denom 4, r1 = -3/4, r2 = 2/4
        let r = ljung_box_series(&[1.0, -1.0, 1.0, -1.0, 0.0], 2, 0).unwrap();
        let q = 5.0 * 7.0 * (0.5625 / 4.0 + 0.25 / 3.0);
        assert!((r.statistic - q).abs() < 1e-12);
        assert_eq!(r.df, 2);
        // χ²(2) survival is exp(-q/2)
        assert!((r.p_value - (-q / 2.0f64).exp()).abs() < 1e-12);
        assert!(ljung_box_series(&[1.0, 2.0], 2, 0).is_err());
    }

    #[test]
    fn var1_selects_lag_one() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let mut hits = 0;
        for seed in 0..10 {
            let data = generate(&SynthSpec::var1(a.clone(), 2000, seed)).unwrap();
            let t = information_criteria_table(&data, 8).unwrap();
            if t.argmin(InfoCriterion::Aic) == 1 {
                hits += 1;
            }
            // heavier penalties never pick a longer lag
            assert!(t.argmin(InfoCriterion::Aic) >= t.argmin(InfoCriterion::Hqic));
            assert!(t.argmin(InfoCriterion::Hqic) >= t.argmin(InfoCriterion::Bic));
        }
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn ic_matches_direct_fit() {
        let a = DMatrix::from_row_slice(2, 2, &[0.4, 0.0, 0.1, 0.2]);
        let data = generate(&SynthSpec::var1(a, 600, 9)).unwrap();
        let t = information_criteria_table(&data, 5).unwrap();
        // lag 3 on the common sample, fit directly
        let m = crate::var::fit_var_ols_from(&data, 3, 5).unwrap();
        let ld = log_det_spd(&m.resid_cov).unwrap();
        let tf = m.nobs() as f64;
        assert!((t.aic[2] - (ld + 2.0 * (3.0 * 4.0 + 2.0) / tf)).abs() < 1e-9);
    }

    #[test]
    fn white_noise_passes_ar_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(ljung_box_series(&e, 10, 0).unwrap().p_value > 0.01);
        let mut x = vec![0.0; 1000];
        for t in 1..1000 {
            x[t] = 0.5 * x[t - 1] + e[t];
        }
        assert!(ljung_box_series(&x, 10, 0).unwrap().p_value < 1e-6);
    }

    #[test]
    fn selection_respects_whiteness() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let data = generate(&SynthSpec::var1(a, 800, 4)).unwrap();
        let s = select_lag(&data, &LagSearchConfig::default()).unwrap();
        assert_eq!(s.selection.histories.len(), 15);
        let chosen = s.selection.histories[s.selection.chosen - 1];
        if s.selection.histories.iter().any(|h| h.whiteness_p >= 0.10) {
            assert!(chosen.whiteness_p >= 0.10);
        }
    }

    #[test]
    fn feasible_lag_shrinks_for_short_samples() {
        assert_eq!(feasible_max_lag(365, 3, 15), 15);
        assert_eq!(feasible_max_lag(30, 3, 15), 7);
        assert_eq!(feasible_max_lag(3, 3, 15), 0);
    }
}
