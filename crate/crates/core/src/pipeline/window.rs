//! Nested yearly windows, multi-year segments and period shifts.

use chrono::{Duration, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{MiaoError, Result};
use crate::ingest::GroupManifest;

/// One analysis period `T_m`, possibly shifted by `shift_days`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisWindow {
    pub start: NaiveDate,
    /// Inclusive.
    pub end: NaiveDate,
    pub m_index: u32,
    pub shift_days: i64,
    pub split_index: usize,
}

impl AnalysisWindow {
    pub fn len_days(&self) -> usize {
        ((self.end - self.start).num_days() + 1) as usize
    }
}

/// A block of at most `max_m` years with its nested windows `T_1 ⊂ … ⊂ T_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub split_index: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub windows: Vec<AnalysisWindow>,
}

impl Segment {
    pub fn m(&self) -> u32 {
        self.windows.len() as u32
    }

    /// The segment's windows moved by `tau` days.
    pub fn shifted(&self, tau: i64) -> Vec<AnalysisWindow> {
        self.windows.iter().map(|w| shift_window(w, tau)).collect()
    }

    /// Whether every window shifted by `tau` ends on or before `data_end`.
    pub fn shift_fits(&self, tau: i64, data_end: NaiveDate) -> bool {
        self.shifted(tau).iter().all(|w| w.end <= data_end)
    }
}

/// `d` plus `years` calendar years (Feb 29 maps to Feb 28).
pub fn add_years(d: NaiveDate, years: u32) -> NaiveDate {
    d.checked_add_months(Months::new(12 * years)).expect("date in range")
}

/// Last day of the `years`-year period starting at `start`.
pub fn period_end(start: NaiveDate, years: u32) -> NaiveDate {
    add_years(start, years) - Duration::days(1)
}

/// Whole years that fit in `[start, end]`.
pub fn whole_years(start: NaiveDate, end: NaiveDate) -> u32 {
    let mut k = 0;
    while period_end(start, k + 1) <= end {
        k += 1;
    }
    k
}

/// Splits `[start, end]` into segments of `max_m` years. A final remainder
/// of at least one year becomes its own segment, rounded down to whole
/// years; a shorter remainder extends the last window of the previous
/// segment to `end`.
pub fn build_segments(start: NaiveDate, end: NaiveDate, max_m: u32) -> Result<Vec<Segment>> {
    if max_m == 0 {
        return Err(MiaoError::Window("max_m must be at least 1".into()));
    }
    if whole_years(start, end) == 0 {
        return Err(MiaoError::Window(format!("span {start}..{end} is shorter than one year")));
    }
    let mut segments: Vec<Segment> = Vec::new();
    let mut seg_start = start;
    while seg_start <= end {
        let years = whole_years(seg_start, end).min(max_m);
        if years == 0 {
            let last = segments.last_mut().expect("first segment spans a year");
            last.end = end;
            last.windows.last_mut().expect("segment has windows").end = end;
            break;
        }
        let split_index = segments.len();
        let windows = (1..=years)
            .map(|m| AnalysisWindow { start: seg_start, end: period_end(seg_start, m), m_index: m, shift_days: 0, split_index })
            .collect::<Vec<_>>();
        let seg_end = windows.last().expect("years >= 1").end;
        segments.push(Segment { split_index, start: seg_start, end: seg_end, windows });
        if years < max_m {
            break;
        }
        seg_start = seg_end + Duration::days(1);
    }
    Ok(segments)
}

pub fn build_windows(group: &GroupManifest, max_m: u32) -> Result<Vec<Segment>> {
    if group.start_date >= group.end_date {
        return Err(MiaoError::Window(format!("group {}: start is not before end", group.group_id)));
    }
    build_segments(group.start_date, group.end_date, max_m)
}

/// Slides both endpoints by `tau_days`.
pub fn shift_window(window: &AnalysisWindow, tau_days: i64) -> AnalysisWindow {
    AnalysisWindow {
        start: window.start + Duration::days(tau_days),
        end: window.end + Duration::days(tau_days),
        shift_days: window.shift_days + tau_days,
        ..*window
    }
}

/// Moves the end date one year (365 days) earlier for the predictive
/// evaluation. Returns `None` when less than one year would remain.
pub fn mask_final_year(group: &GroupManifest) -> Option<GroupManifest> {
    let end = group.end_date - Duration::days(365);
    if end <= group.start_date || whole_years(group.start_date, end) == 0 {
        return None;
    }
    let horizon = group.data_horizon.map_or(end, |h| h.min(end));
    let split_count = build_segments(group.start_date, end, 4).map(|s| s.len() as u32).unwrap_or(group.split_count);
    Some(GroupManifest { end_date: end, data_horizon: Some(horizon), split_count, ..group.clone() })
}
