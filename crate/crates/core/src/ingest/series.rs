//! Daily activity series and the series store.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{Duration, FixedOffset, NaiveDate};
use serde::{Deserialize, Serialize};

use super::commit_log::CommitRecord;
use crate::error::{MiaoError, Result};

/// Daily commit counts for one project over consecutive calendar days.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivitySeries {
    project_id: String,
    start_date: NaiveDate,
    counts: Vec<u32>,
}

impl ActivitySeries {
    pub fn new(project_id: impl Into<String>, start_date: NaiveDate, counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(MiaoError::EmptyRange("activity series needs at least one day".into()));
        }
        Ok(Self { project_id: project_id.into(), start_date, counts })
    }

    pub fn project_id(&self) -> &str {
        &self.project_id
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    /// Last covered day (inclusive).
    pub fn end_date(&self) -> NaiveDate {
        self.start_date + Duration::days(self.counts.len() as i64 - 1)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + Duration::days(index as i64)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let off = (date - self.start_date).num_days();
        (off >= 0 && (off as usize) < self.counts.len()).then_some(off as usize)
    }

    pub fn covers(&self, from: NaiveDate, to: NaiveDate) -> bool {
        from >= self.start_date && to <= self.end_date() && from <= to
    }

    /// Counts for the inclusive date range, if covered.
    pub fn slice(&self, from: NaiveDate, to: NaiveDate) -> Option<&[u32]> {
        if !self.covers(from, to) {
            return None;
        }
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        Some(&self.counts[a..=b])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Total commits inside the inclusive range, clipped to coverage.
    pub fn total_between(&self, from: NaiveDate, to: NaiveDate) -> u64 {
        let from = from.max(self.start_date);
        let to = to.min(self.end_date());
        if from > to {
            return 0;
        }
        self.slice(from, to).map(|s| s.iter().map(|&c| c as u64).sum()).unwrap_or(0)
    }

    /// Copy restricted to days on or before `last`.
    pub fn truncated(&self, last: NaiveDate) -> Option<Self> {
        let idx = self.index_of(last.min(self.end_date()))?;
        Some(Self { project_id: self.project_id.clone(), start_date: self.start_date, counts: self.counts[..=idx].to_vec() })
    }

    pub fn scaled_values(&self, from: NaiveDate, to: NaiveDate, scale: f64) -> Option<Vec<f64>> {
        self.slice(from, to).map(|s| s.iter().map(|&c| c as f64 * scale).collect())
    }
}

/// Buckets commits into calendar days of `zone` over `[start, end]`.
///
/// Records outside the range are ignored.
pub fn aggregate_daily(
    project_id: &str,
    records: &[CommitRecord],
    start: NaiveDate,
    end: NaiveDate,
    zone: FixedOffset,
) -> Result<ActivitySeries> {
    if end < start {
        return Err(MiaoError::EmptyRange(format!("{start} .. {end}")));
    }
    let days = (end - start).num_days() as usize + 1;
    let mut counts = vec![0u32; days];
    for r in records {
        let day = r.timestamp.with_timezone(&zone).date_naive();
        let off = (day - start).num_days();
        if off >= 0 && (off as usize) < days {
            counts[off as usize] += 1;
        }
    }
    ActivitySeries::new(project_id, start, counts)
}

/// Aggregates over the span from the first to the last commit (or `until`).
pub fn aggregate_span(
    project_id: &str,
    records: &[CommitRecord],
    zone: FixedOffset,
    until: Option<NaiveDate>,
) -> Result<ActivitySeries> {
    let days = records.iter().map(|r| r.timestamp.with_timezone(&zone).date_naive());
    let (first, last) = days.fold((None::<NaiveDate>, None::<NaiveDate>), |(lo, hi), d| {
        (Some(lo.map_or(d, |x| x.min(d))), Some(hi.map_or(d, |x| x.max(d))))
    });
    let (Some(first), Some(last)) = (first, last) else {
        return Err(MiaoError::EmptyRange(format!("no commits for {project_id}")));
    };
    let end = until.map_or(last, |u| u.max(last));
    aggregate_daily(project_id, records, first, end, zone)
}

/// Cessation threshold: the trailing-window total divided by `months` is
/// compared against `threshold` (a monthly average).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CessationRule {
    pub window_days: usize,
    pub months: f64,
    pub threshold: f64,
}

impl Default for CessationRule {
    fn default() -> Self {
        Self { window_days: 365, months: 12.0, threshold: 1.5 }
    }
}

/// First date whose trailing window has a monthly average below the threshold.
pub fn detect_end_date(series: &ActivitySeries, rule: &CessationRule) -> Result<Option<NaiveDate>> {
    let w = rule.window_days;
    let counts = series.counts();
    if w == 0 || counts.len() < w {
        return Err(MiaoError::TooShort { needed: w, got: counts.len() });
    }
    let mut sum: u64 = counts[..w].iter().map(|&c| c as u64).sum();
    let below = |s: u64| (s as f64) / rule.months < rule.threshold;
    if below(sum) {
        return Ok(Some(series.date_at(w - 1)));
    }
    for end in w..counts.len() {
        sum += counts[end] as u64;
        sum -= counts[end - w] as u64;
        if below(sum) {
            return Ok(Some(series.date_at(end)));
        }
    }
    Ok(None)
}

/// Writes `date,count` rows with a header.
pub fn write_series_csv<W: Write>(series: &ActivitySeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "count"])?;
    for (i, c) in series.counts().iter().enumerate() {
        w.write_record([series.date_at(i).to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a pre-aggregated `date,count` series. Missing days are zero-filled;
/// the header row is optional.
pub fn read_series_csv<R: Read>(project_id: &str, input: R) -> Result<ActivitySeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut points: Vec<(NaiveDate, u32)> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 1;
        let (Some(d), Some(c)) = (row.get(0), row.get(1)) else {
            return Err(MiaoError::Parse { line, reason: "expected `date,count`".into() });
        };
        if i == 0 && d.eq_ignore_ascii_case("date") {
            continue;
        }
        let date = NaiveDate::parse_from_str(d, "%Y-%m-%d")
            .map_err(|e| MiaoError::Parse { line, reason: format!("bad date `{d}`: {e}") })?;
        let count: u32 = c.parse().map_err(|e| MiaoError::Parse { line, reason: format!("bad count `{c}`: {e}") })?;
        points.push((date, count));
    }
    let (Some(first), Some(last)) = (points.iter().map(|p| p.0).min(), points.iter().map(|p| p.0).max()) else {
        return Err(MiaoError::EmptyRange(format!("no rows for {project_id}")));
    };
    let mut counts = vec![0u32; (last - first).num_days() as usize + 1];
    for (d, c) in points {
        counts[(d - first).num_days() as usize] += c;
    }
    ActivitySeries::new(project_id, first, counts)
}

/// File name used for a project inside a series directory (`owner/repo` → `owner__repo.csv`).
pub fn series_file_name(project_id: &str) -> String {
    format!("{}.csv", project_id.replace('/', "__"))
}

pub fn project_id_from_stem(stem: &str) -> String {
    stem.replace("__", "/")
}

/// Series keyed by project id.
#[derive(Debug, Clone, Default)]
pub struct SeriesStore {
    series: BTreeMap<String, ActivitySeries>,
}

impl SeriesStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: ActivitySeries) {
        self.series.insert(s.project_id().to_string(), s);
    }

    pub fn get(&self, project_id: &str) -> Option<&ActivitySeries> {
        self.series.get(project_id)
    }

    pub fn require(&self, project_id: &str) -> Result<&ActivitySeries> {
        self.get(project_id).ok_or_else(|| MiaoError::MissingSeries(project_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActivitySeries> {
        self.series.values()
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut store = Self::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        for p in paths {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let id = project_id_from_stem(stem);
            store.insert(read_series_csv(&id, fs::File::open(&p)?)?);
        }
        Ok(store)
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for s in self.series.values() {
            let f = fs::File::create(dir.join(series_file_name(s.project_id())))?;
            write_series_csv(s, std::io::BufWriter::new(f))?;
        }
        Ok(())
    }
}
