//! Analysis-group manifests.
//!
//! CSV header: `group,target,competitor1,competitor2,rev,start_date,end_date,splits`.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::series::SeriesStore;
use crate::error::{MiaoError, Result};

pub const MANIFEST_HEADER: [&str; 8] = ["group", "target", "competitor1", "competitor2", "rev", "start_date", "end_date", "splits"];

/// Minimum three-way overlap, in days.
pub const MIN_OVERLAP_DAYS: i64 = 365;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupManifest {
    pub group_id: u32,
    pub target: String,
    pub competitor1: String,
    pub competitor2: String,
    pub rev: bool,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub split_count: u32,
    /// Last day of data the analysis may read. Set when the final year is
    /// masked so that period shifts cannot look past the masked end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_horizon: Option<NaiveDate>,
}

impl GroupManifest {
    pub fn projects(&self) -> [&str; 3] {
        [&self.target, &self.competitor1, &self.competitor2]
    }
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    group: u32,
    target: String,
    competitor1: String,
    competitor2: String,
    rev: u8,
    start_date: String,
    end_date: String,
    splits: u32,
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| MiaoError::Parse { line, reason: format!("bad date `{s}`: {e}") })
}

pub fn read_manifest<R: Read>(input: R) -> Result<Vec<GroupManifest>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
        return Err(MiaoError::Parse { line: 1, reason: format!("expected header `{}`", MANIFEST_HEADER.join(",")) });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<ManifestRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| MiaoError::Parse { line, reason: e.to_string() })?;
        let rev = match row.rev {
            0 => false,
            1 => true,
            other => return Err(MiaoError::Parse { line, reason: format!("rev must be 0 or 1, got {other}") }),
        };
        if row.splits == 0 {
            return Err(MiaoError::Parse { line, reason: "splits must be positive".into() });
        }
        out.push(GroupManifest {
            group_id: row.group,
            target: row.target,
            competitor1: row.competitor1,
            competitor2: row.competitor2,
            rev,
            start_date: parse_date(&row.start_date, line)?,
            end_date: parse_date(&row.end_date, line)?,
            split_count: row.splits,
            data_horizon: None,
        });
    }
    Ok(out)
}

pub fn load_manifest(path: &Path) -> Result<Vec<GroupManifest>> {
    read_manifest(std::fs::File::open(path)?)
}

pub fn write_manifest<W: Write>(groups: &[GroupManifest], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MANIFEST_HEADER)?;
    for g in groups {
        w.write_record([
            g.group_id.to_string(),
            g.target.clone(),
            g.competitor1.clone(),
            g.competitor2.clone(),
            u8::from(g.rev).to_string(),
            g.start_date.to_string(),
            g.end_date.to_string(),
            g.split_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A group that passed validation, with competitor order repaired.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedGroup {
    pub manifest: GroupManifest,
    /// Inclusive first/last day on which all three series exist inside the group span.
    pub overlap: (NaiveDate, NaiveDate),
    pub competitor_totals: (u64, u64),
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GroupValidation {
    Accepted(ValidatedGroup),
    Rejected { group_id: u32, reasons: Vec<String> },
}

impl GroupValidation {
    pub fn accepted(self) -> Option<ValidatedGroup> {
        match self {
            GroupValidation::Accepted(g) => Some(g),
            GroupValidation::Rejected { .. } => None,
        }
    }
}

/// Checks span, overlap and competitor ordering against the series store.
///
/// Competitor ordering is a convention, so a reversed pair is swapped with a
/// warning instead of rejected.
pub fn validate_group(manifest: &GroupManifest, store: &SeriesStore) -> Result<GroupValidation> {
    let target = store.require(&manifest.target)?;
    let c1 = store.require(&manifest.competitor1)?;
    let c2 = store.require(&manifest.competitor2)?;
    let mut reasons = Vec::new();
    if manifest.start_date >= manifest.end_date {
        reasons.push(format!("start date {} is not before end date {}", manifest.start_date, manifest.end_date));
    }
    let lo = [target.start_date(), c1.start_date(), c2.start_date(), manifest.start_date].into_iter().max().unwrap();
    let hi = [target.end_date(), c1.end_date(), c2.end_date(), manifest.end_date].into_iter().min().unwrap();
    let overlap_days = (hi - lo).num_days() + 1;
    if overlap_days < MIN_OVERLAP_DAYS {
        reasons.push(format!("three-way overlap is {} days, need {MIN_OVERLAP_DAYS}", overlap_days.max(0)));
    }
    if !reasons.is_empty() {
        return Ok(GroupValidation::Rejected { group_id: manifest.group_id, reasons });
    }
    let mut m = manifest.clone();
    let mut t1 = c1.total_between(lo, hi);
    let mut t2 = c2.total_between(lo, hi);
    let mut warnings = Vec::new();
    if t2 > t1 {
        warnings.push(format!(
            "group {}: competitor2 {} has more commits ({t2}) than competitor1 {} ({t1}); swapped",
            m.group_id, m.competitor2, m.competitor1
        ));
        std::mem::swap(&mut m.competitor1, &mut m.competitor2);
        std::mem::swap(&mut t1, &mut t2);
    }
    Ok(GroupValidation::Accepted(ValidatedGroup { manifest: m, overlap: (lo, hi), competitor_totals: (t1, t2), warnings }))
}
