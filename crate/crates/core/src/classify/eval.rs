//! Leave-one-out evaluation, permutation-set datasets and report files.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{unify_features, FeatureKey, FeatureVector};
use super::tree::{class_weights, fit_tree, DecisionTree};
use crate::config::ClassifierConfig;
use crate::error::{MiaoError, Result};
use crate::ingest::GroupManifest;
use crate::pipeline::{GroupOutcome, RoleOrdering};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub rev: ClassMetrics,
    pub non_rev: ClassMetrics,
    pub n: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn class_metrics(truth: &[bool], pred: &[bool], class: bool) -> ClassMetrics {
    let tp = truth.iter().zip(pred).filter(|(t, p)| **t == class && **p == class).count();
    let predicted = pred.iter().filter(|p| **p == class).count();
    let support = truth.iter().filter(|t| **t == class).count();
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, support);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    ClassMetrics { precision, recall, f1, support }
}

/// Accuracy and per-class precision, recall and F1; undefined ratios are 0.
pub fn metrics(truth: &[bool], pred: &[bool]) -> Metrics {
    let correct = truth.iter().zip(pred).filter(|(t, p)| t == p).count();
    Metrics { accuracy: ratio(correct, truth.len()), rev: class_metrics(truth, pred, true), non_rev: class_metrics(truth, pred, false), n: truth.len() }
}

fn mean_metrics(folds: &[Metrics], n: usize, rev_support: usize) -> Metrics {
    let k = folds.len() as f64;
    let avg = |f: &dyn Fn(&Metrics) -> f64| folds.iter().map(f).sum::<f64>() / k;
    Metrics {
        accuracy: avg(&|m| m.accuracy),
        rev: ClassMetrics { precision: avg(&|m| m.rev.precision), recall: avg(&|m| m.rev.recall), f1: avg(&|m| m.rev.f1), support: rev_support },
        non_rev: ClassMetrics {
            precision: avg(&|m| m.non_rev.precision),
            recall: avg(&|m| m.non_rev.recall),
            f1: avg(&|m| m.non_rev.f1),
            support: n - rev_support,
        },
        n,
    }
}

fn design(samples: &[&FeatureVector]) -> (Vec<[f64; 6]>, Vec<bool>) {
    (samples.iter().map(|s| s.values).collect(), samples.iter().map(|s| s.rev).collect())
}

/// Tree on the whole dataset with balanced class weights.
pub fn fit_dataset(dataset: &[FeatureVector], cfg: &ClassifierConfig) -> Result<DecisionTree> {
    let refs: Vec<&FeatureVector> = dataset.iter().collect();
    let (x, y) = design(&refs);
    let w = class_weights(&y)?;
    fit_tree(&x, &y, &w, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Metrics of the pooled held-out predictions.
    pub pooled: Metrics,
    /// Per-fold metrics averaged over folds.
    pub fold_mean: Metrics,
    /// Importances of the tree fitted on every sample.
    pub importances: [f64; 6],
    /// Held-out prediction per sample, in dataset order.
    pub predictions: Vec<bool>,
    pub group_ids: Vec<u32>,
}

/// Leave-one-out cross-validation; class weights are recomputed per fold.
pub fn loocv(dataset: &[FeatureVector], cfg: &ClassifierConfig) -> Result<EvalReport> {
    if dataset.len() < 2 {
        return Err(MiaoError::Labels("LOOCV needs at least two samples".into()));
    }
    let predictions = (0..dataset.len())
        .into_par_iter()
        .map(|k| {
            let train: Vec<&FeatureVector> = dataset.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, s)| s).collect();
            let (x, y) = design(&train);
            let w = class_weights(&y)?;
            Ok(fit_tree(&x, &y, &w, cfg)?.predict(&dataset[k].values))
        })
        .collect::<Result<Vec<bool>>>()?;
    let truth: Vec<bool> = dataset.iter().map(|s| s.rev).collect();
    let pooled = metrics(&truth, &predictions);
    let folds: Vec<Metrics> = truth.iter().zip(&predictions).map(|(t, p)| metrics(&[*t], &[*p])).collect();
    let fold_mean = mean_metrics(&folds, truth.len(), pooled.rev.support);
    let importances = fit_dataset(dataset, cfg)?.importances;
    Ok(EvalReport { pooled, fold_mean, importances, predictions, group_ids: dataset.iter().map(|s| s.group_id).collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDataset {
    pub set: usize,
    pub samples: Vec<FeatureVector>,
    /// Groups left out, with the reason.
    pub skipped: Vec<(u32, String)>,
}

/// One dataset per permutation set. REV groups contribute the same
/// features to every set; non-REV groups use the set's ordering.
pub fn permutation_sets(outcomes: &[GroupOutcome], manifests: &[GroupManifest], sets: &[usize]) -> Result<Vec<SetDataset>> {
    sets.iter()
        .map(|&set| {
            RoleOrdering::for_set(set)?;
            let mut samples = Vec::new();
            let mut skipped = Vec::new();
            for o in outcomes {
                let gid = o.group_id();
                let manifest = manifests
                    .iter()
                    .find(|m| m.group_id == gid)
                    .ok_or_else(|| MiaoError::Invalid(format!("group {gid} has no manifest row")))?;
                match o {
                    GroupOutcome::Failed { reason, .. } => skipped.push((gid, reason.clone())),
                    GroupOutcome::Completed(r) => {
                        let ordering = RoleOrdering::for_group(set, manifest.rev)?;
                        let table = r
                            .scores_for(ordering)
                            .ok_or_else(|| MiaoError::MissingEntry(format!("group {gid} has no scores for ordering {ordering}")))?;
                        samples.push(unify_features(table, manifest)?);
                    }
                }
            }
            Ok(SetDataset { set, samples, skipped })
        })
        .collect()
}

fn metric_rows(m: &Metrics, prefix: &str) -> Vec<(String, f64, usize)> {
    vec![
        (format!("{prefix}accuracy"), m.accuracy, m.n),
        (format!("{prefix}rev_f1"), m.rev.f1, m.rev.support),
        (format!("{prefix}rev_precision"), m.rev.precision, m.rev.support),
        (format!("{prefix}rev_recall"), m.rev.recall, m.rev.support),
        (format!("{prefix}non_rev_f1"), m.non_rev.f1, m.non_rev.support),
        (format!("{prefix}non_rev_precision"), m.non_rev.precision, m.non_rev.support),
        (format!("{prefix}non_rev_recall"), m.non_rev.recall, m.non_rev.support),
    ]
}

/// All rows of one set's report: pooled metrics, then fold means.
pub fn report_rows(r: &EvalReport) -> Vec<(String, f64, usize)> {
    let mut rows = metric_rows(&r.pooled, "");
    rows.extend(metric_rows(&r.fold_mean, "fold_mean_"));
    rows
}

/// `set,metric,value,support`; with several sets, `mean` and `sd` rows follow.
pub fn write_metrics_csv<W: Write>(out: W, reports: &[(usize, EvalReport)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["set", "metric", "value", "support"])?;
    for (set, r) in reports {
        for (name, v, s) in report_rows(r) {
            wtr.write_record([set.to_string(), name, format!("{v:.6}"), s.to_string()])?;
        }
    }
    if reports.len() > 1 {
        let per_set: Vec<Vec<(String, f64, usize)>> = reports.iter().map(|(_, r)| report_rows(r)).collect();
        let k = per_set.len() as f64;
        for (i, (name, _, _)) in per_set[0].iter().enumerate() {
            let vals: Vec<f64> = per_set.iter().map(|rows| rows[i].1).collect();
            let mean = vals.iter().sum::<f64>() / k;
            let sd = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt();
            let support = per_set[0][i].2;
            wtr.write_record(["mean".to_string(), name.clone(), format!("{mean:.6}"), support.to_string()])?;
            wtr.write_record(["sd".to_string(), name.clone(), format!("{sd:.6}"), support.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// `set,feature,importance`.
pub fn write_importance_csv<W: Write>(out: W, reports: &[(usize, EvalReport)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["set", "feature", "importance"])?;
    for (set, r) in reports {
        for key in FeatureKey::ALL {
            wtr.write_record([set.to_string(), key.to_string(), format!("{:.6}", r.importances[key.index()])])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
