//! `miao analyze` and `miao evaluate`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use log::{info, warn};
use miao_core::classify::{fit_dataset, loocv, permutation_sets, threshold_report, write_importance_csv, write_metrics_csv, EvalReport, FeatureKey};
use miao_core::config::RunConfig;
use miao_core::ingest::{load_manifest, validate_group, write_manifest, GroupManifest, GroupValidation, SeriesStore};
use miao_core::pipeline::{fitting_summary, mask_final_year, run_groups, write_scores_csv, GroupOutcome, RoleOrdering};
use serde::{Deserialize, Serialize};

use crate::rundir;
use crate::settings::{self, Overrides};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory of `date,count` series files.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Permutation sets to score, e.g. `1,4`.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub sets: Vec<usize>,
    /// Move every group's end one year earlier first.
    #[arg(long)]
    pub mask_final_year: bool,
    /// A `simulate` run whose specs generated these series; adds an
    /// estimated-versus-analytic cumulative effect comparison.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Full history.
    Eval1,
    /// Final year masked.
    Eval2,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Reuse the scores of an earlier `analyze` run instead of recomputing.
    #[arg(long, conflicts_with_all = ["manifest", "series"])]
    pub from_run: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "eval1")]
    pub eval: EvalMode,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    pub sets: Vec<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Run metadata stored next to the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub command: String,
    pub sets: Vec<usize>,
    pub mask_final_year: bool,
    pub groups: usize,
    pub flagged: Vec<Flag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub group_id: u32,
    pub status: String,
    pub reason: String,
}

pub struct Analysis {
    /// Manifests actually analysed, after validation and masking.
    pub manifests: Vec<GroupManifest>,
    pub outcomes: Vec<GroupOutcome>,
    pub flags: Vec<Flag>,
}

impl Analysis {
    pub fn flagged(&self) -> bool {
        self.flags.iter().any(|f| f.status != "masked_out")
    }
}

fn check_sets(sets: &[usize]) -> Result<Vec<usize>> {
    let uniq: BTreeSet<usize> = sets.iter().copied().collect();
    if uniq.is_empty() || uniq.iter().any(|s| !(1..=6).contains(s)) {
        bail!("sets must be drawn from 1..6, got {sets:?}");
    }
    Ok(uniq.into_iter().collect())
}

fn required(path: &Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.clone().or_else(|| fallback.clone()).with_context(|| format!("no {what} given (flag or config paths)"))
}

pub fn analyze_groups(cfg: &RunConfig, manifests: Vec<GroupManifest>, store: &SeriesStore, sets: &[usize], mask: bool) -> Result<Analysis> {
    let mut flags = Vec::new();
    let mut accepted = Vec::new();
    for m in manifests {
        match validate_group(&m, store)? {
            GroupValidation::Accepted(v) => {
                for w in &v.warnings {
                    warn!("{w}");
                }
                accepted.push(v.manifest);
            }
            GroupValidation::Rejected { group_id, reasons } => {
                warn!("group {group_id} rejected: {}", reasons.join("; "));
                flags.push(Flag { group_id, status: "rejected".into(), reason: reasons.join("; ") });
            }
        }
    }
    let manifests: Vec<GroupManifest> = if mask {
        accepted
            .into_iter()
            .filter_map(|m| {
                let masked = mask_final_year(&m);
                if masked.is_none() {
                    info!("group {} dropped: less than a year left after masking", m.group_id);
                    flags.push(Flag { group_id: m.group_id, status: "masked_out".into(), reason: "under one year after masking".into() });
                }
                masked
            })
            .collect()
    } else {
        accepted
    };
    info!("analysing {} groups, sets {sets:?}", manifests.len());
    let outcomes = run_groups(&manifests, store, &cfg.analysis, sets, cfg.threads)?;
    for o in &outcomes {
        match o {
            GroupOutcome::Failed { group_id, reason, .. } => {
                warn!("group {group_id} failed: {reason}");
                flags.push(Flag { group_id: *group_id, status: "failed".into(), reason: reason.clone() });
            }
            GroupOutcome::Completed(r) => {
                for w in &r.warnings {
                    info!("group {}: {w}", r.group_id);
                }
            }
        }
    }
    flags.sort_by_key(|f| f.group_id);
    Ok(Analysis { manifests, outcomes, flags })
}

pub fn write_analysis(dir: &Path, a: &Analysis, sets: &[usize]) -> Result<()> {
    rundir::write_json(dir, "outcomes.json", &a.outcomes)?;
    rundir::write_json(dir, "manifests.json", &a.manifests)?;
    write_manifest(&a.manifests, rundir::writer(dir, "manifest_used.csv")?)?;
    for &set in sets {
        let mut tables = Vec::new();
        for r in a.outcomes.iter().filter_map(|o| o.report()) {
            let ordering = RoleOrdering::for_group(set, r.rev)?;
            let t = r.scores_for(ordering).with_context(|| format!("group {} lacks ordering {ordering}", r.group_id))?;
            tables.push((r.group_id, t));
        }
        write_scores_csv(rundir::writer(dir, &format!("scores_set{set}.csv"))?, tables)?;
    }
    fitting_summary(a.outcomes.iter().filter_map(|o| o.report())).write_csv(rundir::writer(dir, "fitting_summary.csv")?)?;
    let mut w = csv::Writer::from_writer(rundir::writer(dir, "flags.csv")?);
    w.write_record(["group", "status", "reason"])?;
    for f in &a.flags {
        w.write_record([f.group_id.to_string(), f.status.clone(), f.reason.clone()])?;
    }
    w.flush()?;
    Ok(())
}

fn persist(dir: &Path, cfg: &RunConfig, info: &RunInfo) -> Result<()> {
    rundir::write_text(dir, "config.toml", &settings::to_toml(cfg)?)?;
    rundir::write_json(dir, "run.json", info)
}

fn load_inputs(cfg: &RunConfig) -> Result<(Vec<GroupManifest>, SeriesStore)> {
    let manifest = cfg.paths.manifest.as_ref().context("no manifest path")?;
    let series = cfg.paths.series_dir.as_ref().context("no series directory")?;
    let groups = load_manifest(manifest).with_context(|| format!("loading {}", manifest.display()))?;
    let store = SeriesStore::load_dir(series).with_context(|| format!("loading series from {}", series.display()))?;
    Ok((groups, store))
}

pub fn run_analyze(args: &AnalyzeArgs, config: Option<&Path>, threads: Option<usize>) -> Result<bool> {
    let mut cfg = settings::resolve(config, &args.overrides, threads)?;
    cfg.paths.manifest = Some(required(&args.manifest, &cfg.paths.manifest, "manifest")?);
    cfg.paths.series_dir = Some(required(&args.series, &cfg.paths.series_dir, "series directory")?);
    cfg.paths.output_dir = Some(required(&args.out, &cfg.paths.output_dir, "output directory")?);
    let sets = check_sets(&args.sets)?;
    let (groups, store) = load_inputs(&cfg)?;
    let analysis = analyze_groups(&cfg, groups, &store, &sets, args.mask_final_year)?;
    let dir = rundir::create(cfg.paths.output_dir.as_ref().expect("set above"), "analyze")?;
    write_analysis(&dir, &analysis, &sets)?;
    if let Some(sim) = &args.oracle {
        crate::simulate::write_oracle_comparison(&dir, sim, &analysis, &store, &cfg)?;
    }
    let info = RunInfo { command: "analyze".into(), sets, mask_final_year: args.mask_final_year, groups: analysis.manifests.len(), flagged: analysis.flags.clone() };
    persist(&dir, &cfg, &info)?;
    println!("{}", dir.display());
    Ok(analysis.flagged())
}

fn write_evaluation(dir: &Path, a: &Analysis, sets: &[usize], cfg: &RunConfig) -> Result<Vec<(usize, EvalReport)>> {
    let datasets = permutation_sets(&a.outcomes, &a.manifests, sets)?;
    let mut reports = Vec::with_capacity(datasets.len());
    let mut rules = String::new();
    let mut pred = csv::Writer::from_writer(rundir::writer(dir, "predictions.csv")?);
    pred.write_record(["set", "group", "rev", "predicted_rev"])?;
    for ds in &datasets {
        let mut fw = csv::Writer::from_writer(rundir::writer(dir, &format!("features_set{}.csv", ds.set))?);
        let mut header = vec!["group".to_string(), "rev".to_string()];
        header.extend(FeatureKey::ALL.iter().map(|k| k.to_string()));
        fw.write_record(&header)?;
        for s in &ds.samples {
            let mut row = vec![s.group_id.to_string(), u8::from(s.rev).to_string()];
            row.extend(s.values.iter().map(|v| v.to_string()));
            fw.write_record(&row)?;
        }
        fw.flush()?;
        let report = loocv(&ds.samples, &cfg.classifier).with_context(|| format!("set {}", ds.set))?;
        for (g, (s, p)) in report.group_ids.iter().zip(ds.samples.iter().zip(&report.predictions)) {
            pred.write_record([ds.set.to_string(), g.to_string(), u8::from(s.rev).to_string(), u8::from(*p).to_string()])?;
        }
        let tree = fit_dataset(&ds.samples, &cfg.classifier)?;
        rules.push_str(&format!("# Set {}\n{}\n", ds.set, threshold_report(&tree)));
        info!("set {}: LOOCV accuracy {:.3} over {} groups", ds.set, report.pooled.accuracy, ds.samples.len());
        reports.push((ds.set, report));
    }
    pred.flush()?;
    write_metrics_csv(rundir::writer(dir, "metrics.csv")?, &reports)?;
    write_importance_csv(rundir::writer(dir, "importances.csv")?, &reports)?;
    rundir::write_text(dir, "rules.txt", &rules)?;
    Ok(reports)
}

pub fn run_evaluate(args: &EvaluateArgs, config: Option<&Path>, threads: Option<usize>) -> Result<bool> {
    let sets = check_sets(&args.sets)?;
    let mask = args.eval == EvalMode::Eval2;
    let (cfg, analysis, dir) = if let Some(run) = &args.from_run {
        let info: RunInfo = rundir::read_json(run, "run.json")?;
        if info.mask_final_year != mask {
            bail!("{} was analysed with mask_final_year = {}, which does not match {:?}", run.display(), info.mask_final_year, args.eval);
        }
        if let Some(s) = sets.iter().find(|s| !info.sets.contains(s)) {
            bail!("{} has no scores for set {s}", run.display());
        }
        let mut cfg = settings::load(Some(&run.join("config.toml")))?;
        args.overrides.apply(&mut cfg);
        if let Some(out) = &args.out {
            cfg.paths.output_dir = Some(out.clone());
        }
        let out = cfg.paths.output_dir.clone().context("no output directory")?;
        let analysis = Analysis { manifests: rundir::read_json(run, "manifests.json")?, outcomes: rundir::read_json(run, "outcomes.json")?, flags: info.flagged };
        (cfg, analysis, rundir::create(&out, "evaluate")?)
    } else {
        let mut cfg = settings::resolve(config, &args.overrides, threads)?;
        cfg.paths.manifest = Some(required(&args.manifest, &cfg.paths.manifest, "manifest")?);
        cfg.paths.series_dir = Some(required(&args.series, &cfg.paths.series_dir, "series directory")?);
        cfg.paths.output_dir = Some(required(&args.out, &cfg.paths.output_dir, "output directory")?);
        let (groups, store) = load_inputs(&cfg)?;
        let analysis = analyze_groups(&cfg, groups, &store, &sets, mask)?;
        let dir = rundir::create(cfg.paths.output_dir.as_ref().expect("set above"), "evaluate")?;
        write_analysis(&dir, &analysis, &sets)?;
        (cfg, analysis, dir)
    };
    write_evaluation(&dir, &analysis, &sets, &cfg)?;
    let info = RunInfo { command: format!("evaluate {:?}", args.eval).to_lowercase(), sets, mask_final_year: mask, groups: analysis.manifests.len(), flagged: analysis.flags.clone() };
    persist(&dir, &cfg, &info)?;
    println!("{}", dir.display());
    Ok(analysis.flagged())
}
