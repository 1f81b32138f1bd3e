//! Weighted Gini decision tree over the six directed features.

use serde::{Deserialize, Serialize};

use super::features::FeatureKey;
use crate::config::ClassifierConfig;
use crate::error::{MiaoError, Result};

/// `n / (n_classes · n_c)` for each sample's class.
pub fn class_weights(labels: &[bool]) -> Result<Vec<f64>> {
    let n = labels.len();
    let pos = labels.iter().filter(|l| **l).count();
    let neg = n - pos;
    if pos == 0 || neg == 0 {
        return Err(MiaoError::Labels(format!("{pos} REV and {neg} non-REV samples; both classes are required")));
    }
    let w_pos = n as f64 / (2.0 * pos as f64);
    let w_neg = n as f64 / (2.0 * neg as f64);
    Ok(labels.iter().map(|&l| if l { w_pos } else { w_neg }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    /// Samples with `value <= threshold` go left.
    Split { feature: FeatureKey, threshold: f64, left: Box<Node>, right: Box<Node> },
    /// `weights` = weighted counts of non-REV and REV samples.
    Leaf { rev: bool, weights: [f64; 2] },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
    pub max_depth: usize,
    /// Normalized weighted impurity decrease per feature; all zero without splits.
    pub importances: [f64; 6],
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64; 6]) -> bool {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { rev, .. } => return *rev,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[feature.index()] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

/// `W · gini` for class weights `(w0, w1)`.
fn weighted_gini(w0: f64, w1: f64) -> f64 {
    let w = w0 + w1;
    if w <= 0.0 {
        0.0
    } else {
        w - (w0 * w0 + w1 * w1) / w
    }
}

struct Builder<'a> {
    x: &'a [[f64; 6]],
    y: &'a [bool],
    w: &'a [f64],
    max_depth: usize,
    min_leaf: f64,
    decrease: [f64; 6],
}

struct Candidate {
    feature: FeatureKey,
    threshold: f64,
    impurity: f64,
}

impl Builder<'_> {
    fn totals(&self, idx: &[usize]) -> [f64; 2] {
        let mut t = [0.0; 2];
        for &i in idx {
            t[self.y[i] as usize] += self.w[i];
        }
        t
    }

    fn best_split(&self, idx: &[usize], totals: [f64; 2]) -> Option<Candidate> {
        let total = totals[0] + totals[1];
        let tol = 1e-12 * total.max(1.0);
        let mut best: Option<Candidate> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for feature in FeatureKey::ALL {
            let f = feature.index();
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left = [0.0; 2];
            for k in 1..order.len() {
                let prev = order[k - 1];
                left[self.y[prev] as usize] += self.w[prev];
                let (lo, hi) = (self.x[prev][f], self.x[order[k]][f]);
                if !(lo < hi) {
                    continue;
                }
                let right = [totals[0] - left[0], totals[1] - left[1]];
                if left[0] + left[1] < self.min_leaf || right[0] + right[1] < self.min_leaf {
                    continue;
                }
                let impurity = weighted_gini(left[0], left[1]) + weighted_gini(right[0], right[1]);
                if best.as_ref().is_none_or(|b| impurity < b.impurity - tol) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(Candidate { feature, threshold, impurity });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> Node {
        let totals = self.totals(&idx);
        let leaf = Node::Leaf { rev: totals[1] > totals[0], weights: totals };
        let node_impurity = weighted_gini(totals[0], totals[1]);
        if depth >= self.max_depth || totals[0] == 0.0 || totals[1] == 0.0 {
            return leaf;
        }
        let Some(c) = self.best_split(&idx, totals) else {
            return leaf;
        };
        // impure nodes split even at zero gain, which lets XOR-like
        // interactions surface one level down
        self.decrease[c.feature.index()] += (node_impurity - c.impurity).max(0.0);
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][c.feature.index()] <= c.threshold);
        let left = Box::new(self.grow(l, depth + 1));
        let right = Box::new(self.grow(r, depth + 1));
        Node::Split { feature: c.feature, threshold: c.threshold, left, right }
    }
}

/// Greedy binary splits minimizing weighted Gini impurity. Candidate
/// thresholds are midpoints between consecutive distinct values; ties go
/// to the lexicographically smaller feature name, then the lower threshold.
pub fn fit_tree(x: &[[f64; 6]], y: &[bool], w: &[f64], cfg: &ClassifierConfig) -> Result<DecisionTree> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(MiaoError::Dimension(format!("{} rows, {} labels, {} weights", x.len(), y.len(), w.len())));
    }
    if x.len() < 2 {
        return Err(MiaoError::Labels("need at least two samples".into()));
    }
    if !y.iter().any(|l| *l) || y.iter().all(|l| *l) {
        return Err(MiaoError::Labels("both classes are required".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) || w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(MiaoError::Invalid("features must be finite and weights positive".into()));
    }
    let total: f64 = w.iter().sum();
    let mut b = Builder { x, y, w, max_depth: cfg.max_depth, min_leaf: cfg.min_leaf_share * total, decrease: [0.0; 6] };
    let root = b.grow((0..x.len()).collect(), 0);
    let sum: f64 = b.decrease.iter().sum();
    let importances = if sum > 0.0 { b.decrease.map(|d| d / sum) } else { [0.0; 6] };
    Ok(DecisionTree { root, max_depth: cfg.max_depth, importances })
}
