//! Per-window estimation and the aggregation of cumulative effects into scores.

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::score::{ScoreTable, Stage};
use super::window::AnalysisWindow;
use crate::config::{AnalysisConfig, SigmaMode};
use crate::error::{MiaoError, Result};
use crate::ingest::{ActivitySeries, GroupManifest, SeriesStore};
use crate::irf::{impulse_response_sized, raw_miao_scores, sce_sized, IrfTensor, SceMatrix};
use crate::prep::{make_stationary, preprocess};
use crate::var::{fit_var_ols, identify_svar, ljung_box_lags, select_lag, stack_series, SvarModel, VarModel};

/// The three series of a group, in target, competitor 1, competitor 2 order.
#[derive(Debug, Clone)]
pub struct GroupData<'a> {
    pub projects: Vec<String>,
    series: Vec<&'a ActivitySeries>,
    /// First and last day every series covers, clipped to the manifest's data horizon.
    pub data_start: NaiveDate,
    pub data_end: NaiveDate,
}

impl<'a> GroupData<'a> {
    pub fn new(group: &GroupManifest, store: &'a SeriesStore) -> Result<Self> {
        let series = group.projects().iter().map(|p| store.require(p)).collect::<Result<Vec<_>>>()?;
        Self::from_series(series, group.data_horizon)
    }

    pub fn from_series(series: Vec<&'a ActivitySeries>, horizon: Option<NaiveDate>) -> Result<Self> {
        if series.is_empty() {
            return Err(MiaoError::Invalid("group without series".into()));
        }
        let data_start = series.iter().map(|s| s.start_date()).max().expect("non-empty");
        let mut data_end = series.iter().map(|s| s.end_date()).min().expect("non-empty");
        if let Some(h) = horizon {
            data_end = data_end.min(h);
        }
        if data_end < data_start {
            return Err(MiaoError::Window("series do not overlap".into()));
        }
        let projects = series.iter().map(|s| s.project_id().to_string()).collect();
        Ok(Self { projects, series, data_start, data_end })
    }

    pub fn covers(&self, w: &AnalysisWindow) -> bool {
        w.start >= self.data_start && w.end <= self.data_end
    }

    /// Raw counts of each series over the window.
    pub fn window_values(&self, w: &AnalysisWindow) -> Result<Vec<Vec<f64>>> {
        if !self.covers(w) {
            return Err(MiaoError::Window(format!(
                "{}..{} lies outside the available data {}..{}",
                w.start, w.end, self.data_start, self.data_end
            )));
        }
        Ok(self
            .series
            .iter()
            .map(|s| s.slice(w.start, w.end).expect("covered").iter().map(|&c| c as f64).collect())
            .collect())
    }
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_std(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub project: String,
    /// ADF on the series entering the VAR.
    pub adf_statistic: f64,
    pub adf_p_value: f64,
    /// ADF p-value before any differencing.
    pub initial_adf_p_value: f64,
    pub frac_order: f64,
    pub warm_up: usize,
    pub exhausted: bool,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    pub window: AnalysisWindow,
    /// Days in the window.
    pub sample_size: usize,
    /// Rows entering the VAR after differencing warm-up and lags.
    pub effective_obs: usize,
    pub lag: usize,
    pub aic: f64,
    pub bic: f64,
    pub hqic: f64,
    /// Ljung-Box test lags.
    pub lb_max_lag: usize,
    pub lb_statistic: f64,
    pub lb_p_value: f64,
    /// No lag passed the whiteness test.
    pub whiteness_degraded: bool,
    pub stability_radius: f64,
    pub series: Vec<SeriesDiagnostics>,
}

/// Estimation results for one window, shared by every causal ordering.
#[derive(Debug, Clone)]
pub struct WindowFit {
    pub diagnostics: WindowDiagnostics,
    pub var: VarModel<f64>,
    /// Scale used to normalize each responding series.
    pub sigma: Vec<f64>,
}

/// Preprocessing, stationarity, lag search and VAR estimation for a window.
pub fn fit_window(data: &GroupData<'_>, window: &AnalysisWindow, cfg: &AnalysisConfig) -> Result<WindowFit> {
    let raw = data.window_values(window)?;
    let pcfg = cfg.preprocess();
    let scfg = cfg.stationarity();
    let mut prepared = Vec::with_capacity(raw.len());
    let mut raw_sigma = Vec::with_capacity(raw.len());
    for (values, project) in raw.iter().zip(&data.projects) {
        let p = preprocess(values, window.start, &pcfg);
        let s = sample_std(&p);
        if !(s > 0.0) {
            return Err(MiaoError::Degenerate(format!("{project} is constant over {}..{}", window.start, window.end)));
        }
        raw_sigma.push(s);
        prepared.push(p);
    }
    let stationary = prepared
        .iter()
        .zip(&data.projects)
        .map(|(p, project)| {
            make_stationary(p, &scfg).map_err(|e| match e {
                MiaoError::Degenerate(m) => MiaoError::Degenerate(format!("{project}: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let common = stationary.iter().map(|s| s.values.len()).min().expect("three series");
    let aligned: Vec<&[f64]> = stationary.iter().map(|s| &s.values[s.values.len() - common..]).collect();
    let sigma = match cfg.sigma_mode {
        SigmaMode::Raw => raw_sigma.clone(),
        SigmaMode::Differenced => aligned.iter().map(|v| sample_std(v)).collect(),
    };
    if let Some(k) = sigma.iter().position(|s| !(*s > 0.0)) {
        return Err(MiaoError::Degenerate(format!("{} has zero spread after differencing", data.projects[k])));
    }
    let matrix = stack_series(&aligned)?;
    let search = select_lag(&matrix, &cfg.lag_search())?;
    let lag = search.selection.chosen;
    let var = fit_var_ols(&matrix, lag)?;
    let worst = *search.chosen_whiteness().worst().expect("three equations");
    let series = stationary
        .iter()
        .zip(&data.projects)
        .zip(&raw_sigma)
        .map(|((s, project), sig)| SeriesDiagnostics {
            project: project.clone(),
            adf_statistic: s.final_adf.statistic,
            adf_p_value: s.final_adf.p_value,
            initial_adf_p_value: s.initial_adf.p_value,
            frac_order: s.frac_order,
            warm_up: s.warm_up,
            exhausted: s.exhausted,
            sigma: *sig,
        })
        .collect();
    let diagnostics = WindowDiagnostics {
        window: *window,
        sample_size: window.len_days(),
        effective_obs: var.nobs(),
        lag,
        aic: search.criteria.aic[lag - 1],
        bic: search.criteria.bic[lag - 1],
        hqic: search.criteria.hqic[lag - 1],
        lb_max_lag: ljung_box_lags(lag),
        lb_statistic: worst.statistic,
        lb_p_value: worst.p_value,
        whiteness_degraded: search.selection.degraded,
        stability_radius: var.stability(),
        series,
    };
    Ok(WindowFit { diagnostics, var, sigma })
}

/// Structural model, impulse responses and cumulative effects for one window.
#[derive(Debug, Clone)]
pub struct Phase1 {
    pub fit: WindowFit,
    pub svar: SvarModel<f64>,
    pub irf: IrfTensor<f64>,
    pub sce: SceMatrix<f64>,
}

pub fn identify(fit: &WindowFit, ordering: &[usize], cfg: &AnalysisConfig) -> Result<(SvarModel<f64>, SceMatrix<f64>)> {
    let svar = identify_svar(fit.var.clone(), ordering)?;
    let sce = sce_sized(&svar, cfg.shock_size)?;
    Ok((svar, sce))
}

pub fn miao_phase1(data: &GroupData<'_>, window: &AnalysisWindow, cfg: &AnalysisConfig, ordering: &[usize]) -> Result<Phase1> {
    let fit = fit_window(data, window, cfg)?;
    let (svar, sce) = identify(&fit, ordering, cfg)?;
    let irf = impulse_response_sized(&svar, cfg.irf_horizon, cfg.shock_size);
    Ok(Phase1 { fit, svar, irf, sce })
}

/// `SCE_ij / σ_i`: responses in multiples of the responding series' spread.
pub fn normalize_sce(sce: &DMatrix<f64>, sigma: &[f64]) -> Result<DMatrix<f64>> {
    if sigma.len() != sce.nrows() {
        return Err(MiaoError::Dimension(format!("{} scales for {} series", sigma.len(), sce.nrows())));
    }
    if let Some(s) = sigma.iter().find(|s| !(**s > 0.0)) {
        return Err(MiaoError::Degenerate(format!("non-positive scale {s}")));
    }
    Ok(DMatrix::from_fn(sce.nrows(), sce.ncols(), |i, j| sce[(i, j)] / sigma[i]))
}

/// Normalized cumulative effects of one split: one entry per computed
/// shift, each holding the windows `T_1..T_m` in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitScores {
    pub split_index: usize,
    pub m: u32,
    pub shifts: Vec<(i64, Vec<DMatrix<f64>>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2 {
    /// `(split, shift, table)` before averaging.
    pub raw: Vec<(usize, i64, ScoreTable)>,
    /// One averaged table per split.
    pub ams: Vec<ScoreTable>,
    pub normalized: ScoreTable,
}

/// Scores per shift, the mean over shifts per split, then the sum over
/// splits divided by the total window count.
pub fn miao_phase2(projects: &[String], splits: &[SplitScores]) -> Result<Phase2> {
    if splits.is_empty() {
        return Err(MiaoError::Invalid("no splits to score".into()));
    }
    let mut raw = Vec::new();
    let mut ams = Vec::with_capacity(splits.len());
    for split in splits {
        if split.shifts.is_empty() {
            return Err(MiaoError::Invalid(format!("split {} has no computed shift", split.split_index)));
        }
        let mut tables = Vec::with_capacity(split.shifts.len());
        for (tau, sces) in &split.shifts {
            if sces.len() != split.m as usize {
                return Err(MiaoError::Invalid(format!("split {} shift {tau}: {} windows, expected {}", split.split_index, sces.len(), split.m)));
            }
            let t = ScoreTable::from_matrix(projects, &raw_miao_scores(sces)?, Stage::RawMs)?;
            raw.push((split.split_index, *tau, t.clone()));
            tables.push(t);
        }
        ams.push(ScoreTable::average_shifts(&tables)?);
    }
    let total_m = splits.iter().map(|s| s.m).sum();
    let normalized = ScoreTable::integrate_splits(&ams, total_m)?;
    Ok(Phase2 { raw, ams, normalized })
}
