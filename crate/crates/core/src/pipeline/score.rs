//! Directed score tables and their sign-based interpretation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MiaoError, Result};

/// Processing stage of a score table; tables only move forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    RawMs,
    Ams,
    NormalizedAms,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::RawMs => "raw_ms",
            Stage::Ams => "ams",
            Stage::NormalizedAms => "normalized_ams",
        })
    }
}

/// Scores for every ordered pair of distinct projects, keyed `(source, target)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub projects: Vec<String>,
    pub stage: Stage,
    #[serde(with = "entry_list")]
    entries: BTreeMap<(String, String), f64>,
}

/// Entries as `{source, target, score}` records, since JSON keys must be strings.
mod entry_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        source: String,
        target: String,
        score: f64,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<(String, String), f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|((a, b), v)| Entry { source: a.clone(), target: b.clone(), score: *v }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(String, String), f64>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?.into_iter().map(|e| ((e.source, e.target), e.score)).collect())
    }
}

impl ScoreTable {
    /// Off-diagonal entries of `ms`, where `ms[(i, j)]` scores `projects[i] → projects[j]`.
    pub fn from_matrix(projects: &[String], ms: &DMatrix<f64>, stage: Stage) -> Result<Self> {
        let n = projects.len();
        if ms.nrows() != n || ms.ncols() != n {
            return Err(MiaoError::Dimension(format!("{n} projects but a {}×{} score matrix", ms.nrows(), ms.ncols())));
        }
        let mut entries = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries.insert((projects[i].clone(), projects[j].clone()), ms[(i, j)]);
                }
            }
        }
        Ok(Self { projects: projects.to_vec(), stage, entries })
    }

    pub fn from_entries(projects: &[String], stage: Stage, entries: impl IntoIterator<Item = ((String, String), f64)>) -> Result<Self> {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        let n = projects.len();
        let t = Self { projects: projects.to_vec(), stage, entries };
        if t.entries.len() != n * n - n {
            return Err(MiaoError::Invalid(format!("expected {} entries, got {}", n * n - n, t.entries.len())));
        }
        for ((s, d), _) in &t.entries {
            if s == d || !projects.contains(s) || !projects.contains(d) {
                return Err(MiaoError::Invalid(format!("unexpected entry {s} -> {d}")));
            }
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, source: &str, target: &str) -> Result<f64> {
        self.entries
            .get(&(source.to_string(), target.to_string()))
            .copied()
            .ok_or_else(|| MiaoError::MissingEntry(format!("{source} -> {target}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries.iter().map(|((s, t), v)| (s.as_str(), t.as_str(), *v))
    }

    fn combine(tables: &[ScoreTable], from: Stage, to: Stage, divisor: f64) -> Result<ScoreTable> {
        let first = tables.first().ok_or_else(|| MiaoError::Invalid("no tables to combine".into()))?;
        for t in tables {
            if t.stage != from {
                return Err(MiaoError::Stage { from: t.stage.to_string(), to: to.to_string() });
            }
            if t.projects != first.projects {
                return Err(MiaoError::Invalid("score tables cover different projects".into()));
            }
        }
        let mut entries = first.entries.clone();
        for t in &tables[1..] {
            for (k, v) in entries.iter_mut() {
                *v += t.entries[k];
            }
        }
        for v in entries.values_mut() {
            *v /= divisor;
        }
        Ok(ScoreTable { projects: first.projects.clone(), stage: to, entries })
    }

    /// Mean of raw tables over the period shifts that were computed.
    pub fn average_shifts(tables: &[ScoreTable]) -> Result<ScoreTable> {
        Self::combine(tables, Stage::RawMs, Stage::Ams, tables.len() as f64)
    }

    /// Sum of per-split averages divided by the total window count `Σ m`.
    pub fn integrate_splits(tables: &[ScoreTable], total_m: u32) -> Result<ScoreTable> {
        if total_m == 0 {
            return Err(MiaoError::Invalid("total window count is zero".into()));
        }
        Self::combine(tables, Stage::Ams, Stage::NormalizedAms, total_m as f64)
    }

    /// Rows `group,source,target,stage,score`, no header.
    pub fn write_csv_rows<W: Write>(&self, group_id: u32, wtr: &mut csv::Writer<W>) -> Result<()> {
        for (s, t, v) in self.iter() {
            wtr.write_record([group_id.to_string(), s.to_string(), t.to_string(), self.stage.to_string(), v.to_string()])?;
        }
        Ok(())
    }
}

pub const SCORE_CSV_HEADER: [&str; 5] = ["group", "source", "target", "stage", "score"];

/// Writes score tables of several groups to one CSV.
pub fn write_scores_csv<'a, W: Write>(out: W, tables: impl IntoIterator<Item = (u32, &'a ScoreTable)>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(SCORE_CSV_HEADER)?;
    for (g, t) in tables {
        t.write_csv_rows(g, &mut wtr)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    group: u32,
    source: String,
    target: String,
    stage: Stage,
    score: f64,
}

/// Reads a score CSV back into one table per group (projects in first-seen order).
pub fn read_scores_csv<R: std::io::Read>(input: R) -> Result<BTreeMap<u32, ScoreTable>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut raw: BTreeMap<u32, (Vec<String>, Option<Stage>, Vec<((String, String), f64)>)> = BTreeMap::new();
    for row in rdr.deserialize::<ScoreRow>() {
        let row = row?;
        let e = raw.entry(row.group).or_insert_with(|| (Vec::new(), None, Vec::new()));
        for p in [&row.source, &row.target] {
            if !e.0.contains(p) {
                e.0.push(p.clone());
            }
        }
        if e.1.is_some_and(|s| s != row.stage) {
            return Err(MiaoError::Invalid(format!("group {} mixes stages", row.group)));
        }
        e.1 = Some(row.stage);
        e.2.push(((row.source, row.target), row.score));
    }
    raw.into_iter()
        .map(|(g, (projects, stage, entries))| Ok((g, ScoreTable::from_entries(&projects, stage.expect("rows present"), entries)?)))
        .collect()
}

/// Sign pattern of a score pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MCase {
    /// `i` suppresses `j`: `MS_ij > 0`, `MS_ji ≤ 0`.
    M1,
    /// `j` suppresses `i`: `MS_ij ≤ 0`, `MS_ji > 0`.
    M2,
    /// Mutual suppression: both `≥ 0`.
    M3,
    /// Mutual support: both `≤ 0`.
    M4,
}

/// Case of the pair `(ms_ij, ms_ji)` (first matching row wins) and `D = |MS_ij − MS_ji|`.
pub fn m_case(ms_ij: f64, ms_ji: f64) -> (MCase, f64) {
    let case = if ms_ij > 0.0 && ms_ji <= 0.0 {
        MCase::M1
    } else if ms_ij <= 0.0 && ms_ji > 0.0 {
        MCase::M2
    } else if ms_ij >= 0.0 && ms_ji >= 0.0 {
        MCase::M3
    } else {
        MCase::M4
    };
    (case, (ms_ij - ms_ji).abs())
}

pub fn classify_m_case(table: &ScoreTable, i: &str, j: &str) -> Result<(MCase, f64)> {
    Ok(m_case(table.get(i, j)?, table.get(j, i)?))
}
