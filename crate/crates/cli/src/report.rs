//! `miao report`: summary tables and plot-ready traces for a run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::Datelike;
use clap::Args;
use log::warn;
use miao_core::ingest::{GroupManifest, SeriesStore};
use miao_core::pipeline::{build_windows, fitting_summary, miao_phase1, GroupData, GroupOutcome};

use crate::analyze::RunInfo;
use crate::rundir;
use crate::settings;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// An `analyze` or `evaluate` run directory.
    #[arg(long)]
    pub run: PathBuf,
    /// Where the report directory goes; defaults to the run's parent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip recomputing impulse-response traces.
    #[arg(long)]
    pub no_irf: bool,
}

/// Long `key,column,value` rows to one row per key and one column per set.
fn pivot(src: &Path, dst: &Path, key: usize, col: usize, val: usize, extra: Option<usize>) -> Result<()> {
    let mut rdr = csv::Reader::from_path(src).with_context(|| format!("reading {}", src.display()))?;
    let headers = rdr.headers()?.clone();
    let mut cols: Vec<String> = Vec::new();
    let mut keys: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut extras: BTreeMap<String, String> = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let (k, c, v) = (row[key].to_string(), row[col].to_string(), row[val].to_string());
        if !keys.contains(&k) {
            keys.push(k.clone());
        }
        if !cols.contains(&c) {
            cols.push(c.clone());
        }
        if let Some(e) = extra {
            extras.entry(k.clone()).or_insert_with(|| row[e].to_string());
        }
        cells.insert((k, c), v);
    }
    let mut w = csv::Writer::from_path(dst)?;
    let mut header = vec![headers[key].to_string()];
    header.extend(cols.iter().map(|c| if c.parse::<usize>().is_ok() { format!("set_{c}") } else { c.clone() }));
    if let Some(e) = extra {
        header.push(headers[e].to_string());
    }
    w.write_record(&header)?;
    for k in &keys {
        let mut row = vec![k.clone()];
        row.extend(cols.iter().map(|c| cells.get(&(k.clone(), c.clone())).cloned().unwrap_or_default()));
        if extra.is_some() {
            row.push(extras.get(k).cloned().unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn commit_curves(dir: &Path, manifests: &[GroupManifest], store: &SeriesStore) -> Result<()> {
    let mut w = csv::Writer::from_writer(rundir::writer(dir, "commit_curves.csv")?);
    w.write_record(["project", "month", "commits"])?;
    let mut projects: Vec<&str> = manifests.iter().flat_map(|m| m.projects()).collect();
    projects.sort_unstable();
    projects.dedup();
    for p in projects {
        let Some(s) = store.get(p) else { continue };
        let mut months: BTreeMap<(i32, u32), u64> = BTreeMap::new();
        for (i, c) in s.counts().iter().enumerate() {
            let d = s.date_at(i);
            *months.entry((d.year(), d.month())).or_default() += *c as u64;
        }
        for ((y, m), c) in months {
            w.write_record([p.to_string(), format!("{y:04}-{m:02}"), c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn irf_traces(dir: &Path, manifests: &[GroupManifest], outcomes: &[GroupOutcome], store: &SeriesStore, cfg: &miao_core::config::RunConfig) -> Result<()> {
    let mut w = csv::Writer::from_writer(rundir::writer(dir, "irf_traces.csv")?);
    w.write_record(["group", "ordering", "response", "shock", "k", "value"])?;
    for r in outcomes.iter().filter_map(|o| o.report()) {
        let Some(m) = manifests.iter().find(|m| m.group_id == r.group_id) else { continue };
        let Some(first) = r.scores.first() else { continue };
        let data = GroupData::new(m, store)?;
        let segs = build_windows(m, cfg.analysis.max_m)?;
        let window = *segs[0].windows.last().expect("segments hold windows");
        let p1 = match miao_phase1(&data, &window, &cfg.analysis, &first.ordering.indices()) {
            Ok(p) => p,
            Err(e) => {
                warn!("group {}: no trace: {e}", r.group_id);
                continue;
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                for (k, v) in p1.irf.trace(i, j).iter().enumerate() {
                    w.write_record([r.group_id.to_string(), first.ordering.to_string(), r.projects[i].clone(), r.projects[j].clone(), k.to_string(), v.to_string()])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &ReportArgs) -> Result<bool> {
    let run = &args.run;
    let cfg = settings::load(Some(&run.join("config.toml")))?;
    let info: RunInfo = rundir::read_json(run, "run.json")?;
    let outcomes: Vec<GroupOutcome> = rundir::read_json(run, "outcomes.json")?;
    let manifests: Vec<GroupManifest> = rundir::read_json(run, "manifests.json")?;
    let root = match &args.out {
        Some(o) => o.clone(),
        None => run.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
    };
    let dir = rundir::create(&root, "report")?;
    fitting_summary(outcomes.iter().filter_map(|o| o.report())).write_csv(rundir::writer(&dir, "fitting_summary.csv")?)?;
    if run.join("metrics.csv").exists() {
        pivot(&run.join("metrics.csv"), &dir.join("metrics_by_set.csv"), 1, 0, 2, Some(3))?;
    }
    if run.join("importances.csv").exists() {
        pivot(&run.join("importances.csv"), &dir.join("importances_by_set.csv"), 1, 0, 2, None)?;
    }
    match &cfg.paths.series_dir {
        Some(series) if series.is_dir() => {
            let store = SeriesStore::load_dir(series)?;
            commit_curves(&dir, &manifests, &store)?;
            if !args.no_irf {
                irf_traces(&dir, &manifests, &outcomes, &store, &cfg)?;
            }
        }
        _ => warn!("series directory unavailable; commit curves and traces skipped"),
    }
    rundir::write_json(&dir, "source_run.json", &serde_json::json!({ "run": run, "command": info.command, "sets": info.sets }))?;
    println!("{}", dir.display());
    Ok(false)
}
