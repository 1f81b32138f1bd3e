//! Whole-group and whole-manifest runs.

use chrono::NaiveDate;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ordering::RoleOrdering;
use super::phase::{fit_window, identify, miao_phase2, normalize_sce, GroupData, SplitScores, WindowDiagnostics, WindowFit};
use super::score::ScoreTable;
use super::window::build_windows;
use crate::config::AnalysisConfig;
use crate::error::{MiaoError, Result};
use crate::ingest::{GroupManifest, SeriesStore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub split_index: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub m: u32,
    pub shifts_used: Vec<i64>,
    pub shifts_skipped: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedScores {
    pub ordering: RoleOrdering,
    pub table: ScoreTable,
    /// Per-split averages before integration.
    pub split_ams: Vec<ScoreTable>,
    /// Windows whose cumulative effect fell back to a truncated sum.
    pub truncated_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group_id: u32,
    pub rev: bool,
    /// Target, competitor 1, competitor 2.
    pub projects: Vec<String>,
    pub splits: Vec<SplitRecord>,
    pub windows: Vec<WindowDiagnostics>,
    pub scores: Vec<OrderedScores>,
    pub warnings: Vec<String>,
}

impl GroupReport {
    pub fn scores_for(&self, ordering: RoleOrdering) -> Option<&ScoreTable> {
        self.scores.iter().find(|s| s.ordering == ordering).map(|s| &s.table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GroupOutcome {
    Completed(GroupReport),
    Failed { group_id: u32, rev: bool, reason: String },
}

impl GroupOutcome {
    pub fn group_id(&self) -> u32 {
        match self {
            GroupOutcome::Completed(r) => r.group_id,
            GroupOutcome::Failed { group_id, .. } => *group_id,
        }
    }

    pub fn report(&self) -> Option<&GroupReport> {
        match self {
            GroupOutcome::Completed(r) => Some(r),
            GroupOutcome::Failed { .. } => None,
        }
    }
}

/// Every window of every split and computed shift, then scores for each ordering.
pub fn run_group(group: &GroupManifest, store: &SeriesStore, cfg: &AnalysisConfig, orderings: &[RoleOrdering]) -> Result<GroupReport> {
    cfg.validate()?;
    if orderings.is_empty() {
        return Err(MiaoError::Invalid("no ordering requested".into()));
    }
    let data = GroupData::new(group, store)?;
    let segments = build_windows(group, cfg.max_m)?;
    let mut warnings = Vec::new();
    if segments.len() as u32 != group.split_count {
        warnings.push(format!("manifest lists {} splits, the span yields {}", group.split_count, segments.len()));
    }
    let mut splits = Vec::with_capacity(segments.len());
    // fits[split][shift][window]
    let mut fits: Vec<Vec<(i64, Vec<WindowFit>)>> = Vec::with_capacity(segments.len());
    for seg in &segments {
        if !seg.windows.iter().all(|w| data.covers(w)) {
            return Err(MiaoError::Window(format!(
                "split {} ({}..{}) is not covered by the data {}..{}",
                seg.split_index, seg.start, seg.end, data.data_start, data.data_end
            )));
        }
        let mut used = Vec::new();
        let mut skipped = Vec::new();
        let mut per_shift = Vec::new();
        for &tau in &cfg.shifts {
            if !seg.shift_fits(tau, data.data_end) {
                skipped.push(tau);
                warnings.push(format!("split {}: shift {tau} runs past {}, skipped", seg.split_index, data.data_end));
                continue;
            }
            let windows = seg.shifted(tau);
            let wf = windows.iter().map(|w| fit_window(&data, w, cfg)).collect::<Result<Vec<_>>>()?;
            used.push(tau);
            per_shift.push((tau, wf));
        }
        splits.push(SplitRecord { split_index: seg.split_index, start: seg.start, end: seg.end, m: seg.m(), shifts_used: used, shifts_skipped: skipped });
        fits.push(per_shift);
    }
    let windows: Vec<WindowDiagnostics> = fits.iter().flatten().flat_map(|(_, wf)| wf.iter().map(|f| f.diagnostics.clone())).collect();
    for w in &windows {
        let tag = format!("split {} m {} shift {}", w.window.split_index, w.window.m_index, w.window.shift_days);
        if w.whiteness_degraded {
            warnings.push(format!("{tag}: no lag passed the whiteness test, lag {} kept", w.lag));
        }
        for s in w.series.iter().filter(|s| s.exhausted) {
            warnings.push(format!("{tag}: {} not stationary at any order, first difference used", s.project));
        }
    }
    let mut scores = Vec::with_capacity(orderings.len());
    for &ordering in orderings {
        let idx = ordering.indices();
        let mut truncated = 0;
        let mut split_scores = Vec::with_capacity(fits.len());
        for (seg, per_shift) in segments.iter().zip(&fits) {
            let mut shifts = Vec::with_capacity(per_shift.len());
            for (tau, wf) in per_shift {
                let mut mats = Vec::with_capacity(wf.len());
                for f in wf {
                    let (_, sce) = identify(f, &idx, cfg)?;
                    if sce.is_truncated() {
                        truncated += 1;
                    }
                    mats.push(normalize_sce(&sce.values, &f.sigma)?);
                }
                shifts.push((*tau, mats));
            }
            split_scores.push(SplitScores { split_index: seg.split_index, m: seg.m(), shifts });
        }
        let p2 = miao_phase2(&data.projects, &split_scores)?;
        if truncated > 0 {
            warnings.push(format!("ordering {ordering}: {truncated} unstable window(s) used a truncated cumulative sum"));
        }
        scores.push(OrderedScores { ordering, table: p2.normalized, split_ams: p2.ams, truncated_windows: truncated });
    }
    Ok(GroupReport { group_id: group.group_id, rev: group.rev, projects: data.projects.clone(), splits, windows, scores, warnings })
}

/// Orderings a group needs to serve the given permutation sets.
pub fn orderings_for_sets(rev: bool, sets: &[usize]) -> Result<Vec<RoleOrdering>> {
    let mut out: Vec<RoleOrdering> = Vec::new();
    for &s in sets {
        let o = RoleOrdering::for_group(s, rev)?;
        if !out.contains(&o) {
            out.push(o);
        }
    }
    Ok(out)
}

/// Runs groups in parallel; outcomes come back in manifest order.
pub fn run_groups(groups: &[GroupManifest], store: &SeriesStore, cfg: &AnalysisConfig, sets: &[usize], threads: Option<usize>) -> Result<Vec<GroupOutcome>> {
    cfg.validate()?;
    for &s in sets {
        RoleOrdering::for_set(s)?;
    }
    let work = || {
        groups
            .par_iter()
            .map(|g| {
                let outcome = orderings_for_sets(g.rev, sets).and_then(|o| run_group(g, store, cfg, &o));
                match outcome {
                    Ok(r) => {
                        info!("group {} done: {} windows", g.group_id, r.windows.len());
                        GroupOutcome::Completed(r)
                    }
                    Err(e) => {
                        warn!("group {} flagged: {e}", g.group_id);
                        GroupOutcome::Failed { group_id: g.group_id, rev: g.rev, reason: e.to_string() }
                    }
                }
            })
            .collect::<Vec<_>>()
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| MiaoError::Invalid(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}
