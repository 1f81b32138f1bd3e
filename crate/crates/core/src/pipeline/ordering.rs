//! Causal orderings of the three roles in a group.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MiaoError, Result};

/// Column order of every group's data matrix: target, competitor 1, competitor 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Target,
    Competitor1,
    Competitor2,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Target, Role::Competitor1, Role::Competitor2];

    pub fn index(self) -> usize {
        match self {
            Role::Target => 0,
            Role::Competitor1 => 1,
            Role::Competitor2 => 2,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Role::Target => "t",
            Role::Competitor1 => "c1",
            Role::Competitor2 => "c2",
        }
    }
}

/// Roles listed from most to least exogenous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoleOrdering(pub [Role; 3]);

use Role::{Competitor1 as C1, Competitor2 as C2, Target as T};

/// Ordering used for every REV group: both competitors may move the target
/// within the same day.
pub const REV_ORDERING: RoleOrdering = RoleOrdering([C1, C2, T]);

/// Orderings of sets 1 to 6.
pub const SET_ORDERINGS: [RoleOrdering; 6] = [
    RoleOrdering([C1, T, C2]),
    RoleOrdering([C1, C2, T]),
    RoleOrdering([C2, T, C1]),
    RoleOrdering([T, C2, C1]),
    RoleOrdering([C2, C1, T]),
    RoleOrdering([T, C1, C2]),
];

impl RoleOrdering {
    /// Column indices in causal order.
    pub fn indices(&self) -> [usize; 3] {
        self.0.map(Role::index)
    }

    /// Ordering of permutation set `set` (1-based).
    pub fn for_set(set: usize) -> Result<Self> {
        if (1..=6).contains(&set) {
            Ok(SET_ORDERINGS[set - 1])
        } else {
            Err(MiaoError::Invalid(format!("set {set} outside 1..=6")))
        }
    }

    /// REV groups keep [`REV_ORDERING`]; the others use the set's ordering.
    pub fn for_group(set: usize, rev: bool) -> Result<Self> {
        let o = Self::for_set(set)?;
        Ok(if rev { REV_ORDERING } else { o })
    }
}

impl fmt::Display for RoleOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0].short(), self.0[1].short(), self.0[2].short())
    }
}

impl FromStr for RoleOrdering {
    type Err = MiaoError;

    /// Parses `t,c1,c2` style lists.
    fn from_str(s: &str) -> Result<Self> {
        let roles: Vec<Role> = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|p| match p.trim() {
                "t" => Ok(T),
                "c1" => Ok(C1),
                "c2" => Ok(C2),
                other => Err(MiaoError::Invalid(format!("unknown role `{other}`"))),
            })
            .collect::<Result<_>>()?;
        if roles.len() != 3 || !Role::ALL.iter().all(|r| roles.contains(r)) {
            return Err(MiaoError::Invalid(format!("`{s}` is not an ordering of t, c1, c2")));
        }
        Ok(RoleOrdering([roles[0], roles[1], roles[2]]))
    }
}
