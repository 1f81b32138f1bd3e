//! Decision paths rendered as disjunctions of threshold conjunctions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::features::FeatureKey;
use super::tree::{DecisionTree, Node};
use crate::error::{MiaoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: FeatureKey,
    /// `value <= threshold` when true, `value > threshold` otherwise.
    pub at_most: bool,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, x: &[f64; 6]) -> bool {
        let v = x[self.feature.index()];
        if self.at_most {
            v <= self.threshold
        } else {
            v > self.threshold
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {:.3}", self.feature, if self.at_most { "<=" } else { ">" }, self.threshold)
    }
}

/// Path conditions per class; a sample belongs to REV when any REV
/// conjunction holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rev: Vec<Vec<Condition>>,
    pub non_rev: Vec<Vec<Condition>>,
}

fn round3(x: f64) -> f64 {
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Keeps the tightest bound per feature and direction.
fn simplify(path: &[Condition]) -> Vec<Condition> {
    let mut out: Vec<Condition> = Vec::new();
    for c in path {
        match out.iter_mut().find(|o| o.feature == c.feature && o.at_most == c.at_most) {
            Some(o) => {
                o.threshold = if c.at_most { o.threshold.min(c.threshold) } else { o.threshold.max(c.threshold) };
            }
            None => out.push(*c),
        }
    }
    out
}

fn collect(node: &Node, path: &mut Vec<Condition>, rules: &mut RuleSet) {
    match node {
        Node::Leaf { rev, .. } => {
            let conj = simplify(path);
            if *rev {
                rules.rev.push(conj);
            } else {
                rules.non_rev.push(conj);
            }
        }
        Node::Split { feature, threshold, left, right } => {
            let t = round3(*threshold);
            path.push(Condition { feature: *feature, at_most: true, threshold: t });
            collect(left, path, rules);
            path.pop();
            path.push(Condition { feature: *feature, at_most: false, threshold: t });
            collect(right, path, rules);
            path.pop();
        }
    }
}

/// Rules of a fitted tree with thresholds rounded to three decimals.
pub fn threshold_report(tree: &DecisionTree) -> RuleSet {
    let mut rules = RuleSet { rev: Vec::new(), non_rev: Vec::new() };
    collect(&tree.root, &mut Vec::new(), &mut rules);
    rules
}

impl RuleSet {
    pub fn predict(&self, x: &[f64; 6]) -> bool {
        self.rev.iter().any(|conj| conj.iter().all(|c| c.holds(x)))
    }
}

fn write_dnf(f: &mut fmt::Formatter<'_>, conjs: &[Vec<Condition>]) -> fmt::Result {
    if conjs.is_empty() {
        return f.write_str("false");
    }
    for (k, conj) in conjs.iter().enumerate() {
        if k > 0 {
            f.write_str(" or ")?;
        }
        if conj.is_empty() {
            f.write_str("(true)")?;
            continue;
        }
        f.write_str("(")?;
        for (i, c) in conj.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("REV: ")?;
        write_dnf(f, &self.rev)?;
        f.write_str("\nnon-REV: ")?;
        write_dnf(f, &self.non_rev)?;
        f.write_str("\n")
    }
}

fn parse_condition(s: &str) -> Result<Condition> {
    let (lhs, at_most, rhs) = if let Some((l, r)) = s.split_once("<=") {
        (l, true, r)
    } else if let Some(idx) = s.rfind('>') {
        // the last '>' is the comparison; earlier ones belong to "->"
        (&s[..idx], false, &s[idx + 1..])
    } else {
        return Err(MiaoError::Invalid(format!("condition `{s}` has no comparison")));
    };
    let feature = lhs.trim().parse()?;
    let threshold = rhs.trim().parse::<f64>().map_err(|e| MiaoError::Invalid(format!("threshold in `{s}`: {e}")))?;
    Ok(Condition { feature, at_most, threshold })
}

fn parse_dnf(s: &str) -> Result<Vec<Vec<Condition>>> {
    let s = s.trim();
    if s == "false" {
        return Ok(Vec::new());
    }
    s.split(" or ")
        .map(|term| {
            let inner = term.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(|| MiaoError::Invalid(format!("term `{term}` is not parenthesized")))?;
            if inner.trim() == "true" {
                return Ok(Vec::new());
            }
            inner.split(" and ").map(parse_condition).collect()
        })
        .collect()
}

impl FromStr for RuleSet {
    type Err = MiaoError;

    fn from_str(s: &str) -> Result<Self> {
        let mut rev = None;
        let mut non_rev = None;
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("REV:") {
                rev = Some(parse_dnf(rest)?);
            } else if let Some(rest) = line.strip_prefix("non-REV:") {
                non_rev = Some(parse_dnf(rest)?);
            } else {
                return Err(MiaoError::Invalid(format!("unexpected rule line `{line}`")));
            }
        }
        Ok(RuleSet {
            rev: rev.ok_or_else(|| MiaoError::Invalid("missing REV line".into()))?,
            non_rev: non_rev.ok_or_else(|| MiaoError::Invalid("missing non-REV line".into()))?,
        })
    }
}
