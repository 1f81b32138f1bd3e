//! Role-keyed feature vectors built from normalized score tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MiaoError, Result};
use crate::ingest::GroupManifest;
use crate::pipeline::{Role, ScoreTable, Stage};

/// Directed pair of roles. Variants are declared in the lexicographic
/// order of their names, which is also the split tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureKey {
    C1ToC2,
    C1ToT,
    C2ToC1,
    C2ToT,
    TToC1,
    TToC2,
}

impl FeatureKey {
    pub const ALL: [FeatureKey; 6] = [
        FeatureKey::C1ToC2,
        FeatureKey::C1ToT,
        FeatureKey::C2ToC1,
        FeatureKey::C2ToT,
        FeatureKey::TToC1,
        FeatureKey::TToC2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn roles(self) -> (Role, Role) {
        use Role::*;
        match self {
            FeatureKey::C1ToC2 => (Competitor1, Competitor2),
            FeatureKey::C1ToT => (Competitor1, Target),
            FeatureKey::C2ToC1 => (Competitor2, Competitor1),
            FeatureKey::C2ToT => (Competitor2, Target),
            FeatureKey::TToC1 => (Target, Competitor1),
            FeatureKey::TToC2 => (Target, Competitor2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKey::C1ToC2 => "c1->c2",
            FeatureKey::C1ToT => "c1->t",
            FeatureKey::C2ToC1 => "c2->c1",
            FeatureKey::C2ToT => "c2->t",
            FeatureKey::TToC1 => "t->c1",
            FeatureKey::TToC2 => "t->c2",
        }
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKey {
    type Err = MiaoError;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('→', "->");
        FeatureKey::ALL
            .into_iter()
            .find(|k| k.name() == compact)
            .ok_or_else(|| MiaoError::Invalid(format!("unknown feature `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub group_id: u32,
    pub rev: bool,
    /// Indexed by [`FeatureKey::index`].
    pub values: [f64; 6],
}

impl FeatureVector {
    pub fn get(&self, key: FeatureKey) -> f64 {
        self.values[key.index()]
    }
}

fn project_of(group: &GroupManifest, role: Role) -> &str {
    match role {
        Role::Target => &group.target,
        Role::Competitor1 => &group.competitor1,
        Role::Competitor2 => &group.competitor2,
    }
}

/// Renames project-keyed scores to role-keyed features.
pub fn unify_features(table: &ScoreTable, group: &GroupManifest) -> Result<FeatureVector> {
    if table.stage != Stage::NormalizedAms {
        return Err(MiaoError::Stage { from: table.stage.to_string(), to: "features".into() });
    }
    let mut values = [0.0; 6];
    for key in FeatureKey::ALL {
        let (s, t) = key.roles();
        let v = table.get(project_of(group, s), project_of(group, t))?;
        if !v.is_finite() {
            return Err(MiaoError::Invalid(format!("group {}: {key} is not finite", group.group_id)));
        }
        values[key.index()] = v;
    }
    Ok(FeatureVector { group_id: group.group_id, rev: group.rev, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use nalgebra::DMatrix;

    fn group1() -> GroupManifest {
        GroupManifest {
            group_id: 1,
            target: "chainer/chainer".into(),
            competitor1: "tensorflow/tensorflow".into(),
            competitor2: "pytorch/pytorch".into(),
            rev: true,
            start_date: NaiveDate::from_ymd_opt(2016, 9, 25).unwrap(),
            end_date: NaiveDate::from_ymd_opt(2020, 9, 25).unwrap(),
            split_count: 1,
            data_horizon: None,
        }
    }

    fn table(stage: Stage) -> ScoreTable {
        let g = group1();
        let projects = vec![g.target.clone(), g.competitor1.clone(), g.competitor2.clone()];
        let m = DMatrix::from_fn(3, 3, |i, j| (10 * i + j) as f64);
        ScoreTable::from_matrix(&projects, &m, stage).unwrap()
    }

    #[test]
    fn names_sort_like_variants() {
        let mut names: Vec<&str> = FeatureKey::ALL.iter().map(|k| k.name()).collect();
        let before = names.clone();
        names.sort();
        assert_eq!(names, before);
        assert_eq!("t → c2".parse::<FeatureKey>().unwrap(), FeatureKey::TToC2);
    }

    #[test]
    fn group_one_roles() {
        let f = unify_features(&table(Stage::NormalizedAms), &group1()).unwrap();
        // t -> c2 is chainer -> pytorch, matrix entry (0, 2)
        assert_eq!(f.get(FeatureKey::TToC2), 2.0);
        assert_eq!(f.get(FeatureKey::C1ToT), 10.0);
        assert_eq!(f.get(FeatureKey::C2ToC1), 21.0);
        assert!(f.rev);
    }

    #[test]
    fn requires_final_stage_and_entries() {
        assert!(unify_features(&table(Stage::Ams), &group1()).is_err());
        let mut g = group1();
        g.competitor2 = "other/other".into();
        assert!(matches!(unify_features(&table(Stage::NormalizedAms), &g), Err(MiaoError::MissingEntry(_))));
    }
}
