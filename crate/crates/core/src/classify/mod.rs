//! REV classification from normalized score tables.

mod eval;
mod features;
mod rules;
mod tree;

pub use eval::{
    fit_dataset, loocv, metrics, permutation_sets, report_rows, write_importance_csv, write_metrics_csv, ClassMetrics, EvalReport,
    Metrics, SetDataset,
};
pub use features::{unify_features, FeatureKey, FeatureVector};
pub use rules::{threshold_report, Condition, RuleSet};
pub use tree::{class_weights, fit_tree, DecisionTree, Node};
