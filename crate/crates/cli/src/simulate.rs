//! `miao simulate`: synthetic series with their exact responses.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::Args;
use log::warn;
use miao_core::config::RunConfig;
use miao_core::ingest::{write_manifest, GroupManifest, SeriesStore};
use miao_core::irf::IrfTensor;
use miao_core::pipeline::{build_segments, build_windows, fit_window, identify, GroupData};
use miao_core::synth::{analytic_irf_sized, analytic_sce_sized, benchmark, generate_series, BenchmarkConfig, SynthSpec};
use serde::{Deserialize, Serialize};

use crate::analyze::Analysis;
use crate::rundir;
use crate::settings::{self, Overrides};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON spec file.
    #[arg(long, conflicts_with = "benchmark")]
    pub spec: Option<PathBuf>,
    /// Generate the labelled benchmark of REV-like and neutral groups.
    #[arg(long)]
    pub benchmark: bool,
    #[arg(long, default_value_t = 20)]
    pub rev_groups: usize,
    #[arg(long, default_value_t = 20)]
    pub neutral_groups: usize,
    #[arg(long, default_value_t = 4)]
    pub years: u32,
    /// First day of the generated series.
    #[arg(long, default_value = "2016-01-01")]
    pub start: NaiveDate,
    /// Project ids for a spec run, comma separated (target first).
    #[arg(long, value_delimiter = ',')]
    pub ids: Option<Vec<String>>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSpec {
    pub group_id: u32,
    pub spec: SynthSpec,
}

fn write_irf(dir: &Path, name: &str, irf: &IrfTensor<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(rundir::writer(dir, name)?);
    w.write_record(["response", "shock", "k", "value"])?;
    for i in 0..irf.dim() {
        for j in 0..irf.dim() {
            for (k, v) in irf.trace(i, j).iter().enumerate() {
                w.write_record([i.to_string(), j.to_string(), k.to_string(), v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &SimulateArgs, config: Option<&Path>) -> Result<bool> {
    let cfg = settings::resolve(config, &args.overrides, None)?;
    let size = cfg.analysis.shock_size;
    let (manifests, store, specs) = if args.benchmark {
        let b = benchmark(&BenchmarkConfig {
            rev_groups: args.rev_groups,
            neutral_groups: args.neutral_groups,
            years: args.years,
            start: args.start,
            seed: cfg.seed,
            ..Default::default()
        })?;
        let specs: Vec<GroupSpec> = b.manifests.iter().zip(b.specs).map(|(m, spec)| GroupSpec { group_id: m.group_id, spec }).collect();
        (b.manifests, b.store, specs)
    } else {
        let path = args.spec.as_ref().context("pass --spec FILE or --benchmark")?;
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: SynthSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        spec.validate()?;
        let ids: Vec<String> = match &args.ids {
            Some(ids) => ids.clone(),
            None if spec.n == 3 => vec!["t".into(), "c1".into(), "c2".into()],
            None => (1..=spec.n).map(|i| format!("s{i}")).collect(),
        };
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let mut store = SeriesStore::new();
        for s in generate_series(&spec, &refs, args.start)? {
            store.insert(s);
        }
        let mut manifests = Vec::new();
        if spec.n == 3 {
            let end = args.start + chrono::Duration::days(spec.length as i64 - 1);
            match build_segments(args.start, end, cfg.analysis.max_m) {
                Ok(segs) => manifests.push(GroupManifest {
                    group_id: 1,
                    target: ids[0].clone(),
                    competitor1: ids[1].clone(),
                    competitor2: ids[2].clone(),
                    rev: false,
                    start_date: args.start,
                    end_date: end,
                    split_count: segs.len() as u32,
                    data_horizon: None,
                }),
                Err(e) => warn!("no manifest written: {e}"),
            }
        }
        (manifests, store, vec![GroupSpec { group_id: 1, spec }])
    };
    let dir = rundir::create(&args.out, "simulate")?;
    store.save_dir(&dir.join("series"))?;
    if !manifests.is_empty() {
        write_manifest(&manifests, rundir::writer(&dir, "manifest.csv")?)?;
    }
    rundir::write_json(&dir, "specs.json", &specs)?;
    if let [only] = specs.as_slice() {
        write_irf(&dir, "analytic_irf.csv", &analytic_irf_sized(&only.spec, cfg.analysis.irf_horizon, size)?)?;
    }
    let mut w = csv::Writer::from_writer(rundir::writer(&dir, "analytic_sce.csv")?);
    w.write_record(["group", "response", "shock", "value"])?;
    for gs in &specs {
        let sce = analytic_sce_sized(&gs.spec, size)?.values;
        for i in 0..sce.nrows() {
            for j in 0..sce.ncols() {
                w.write_record([gs.group_id.to_string(), i.to_string(), j.to_string(), sce[(i, j)].to_string()])?;
            }
        }
    }
    w.flush()?;
    rundir::write_text(&dir, "config.toml", &settings::to_toml(&cfg)?)?;
    println!("{}", dir.display());
    Ok(false)
}

/// Estimated versus analytic cumulative effects on the longest window of
/// each group's first split, identified in the generator's variable order.
pub fn write_oracle_comparison(dir: &Path, sim_run: &Path, a: &Analysis, store: &SeriesStore, cfg: &RunConfig) -> Result<()> {
    let specs: Vec<GroupSpec> = rundir::read_json(sim_run, "specs.json")?;
    let by_id: BTreeMap<u32, &SynthSpec> = specs.iter().map(|g| (g.group_id, &g.spec)).collect();
    let mut w = csv::Writer::from_writer(rundir::writer(dir, "oracle_sce.csv")?);
    w.write_record(["group", "response", "shock", "estimated", "analytic", "abs_error", "differenced"])?;
    for m in &a.manifests {
        let Some(spec) = by_id.get(&m.group_id) else { continue };
        if spec.n != 3 {
            bail!("spec for group {} has {} variables", m.group_id, spec.n);
        }
        let data = GroupData::new(m, store)?;
        let segs = build_windows(m, cfg.analysis.max_m)?;
        let window = *segs[0].windows.last().expect("segments hold windows");
        let fit = match fit_window(&data, &window, &cfg.analysis) {
            Ok(f) => f,
            Err(e) => {
                warn!("group {}: no oracle comparison: {e}", m.group_id);
                continue;
            }
        };
        let differenced = fit.diagnostics.series.iter().any(|s| s.frac_order > 0.0);
        let (_, est) = identify(&fit, &[0, 1, 2], &cfg.analysis)?;
        let truth = analytic_sce_sized(spec, cfg.analysis.shock_size)?.values;
        for i in 0..3 {
            for j in 0..3 {
                let (e, t) = (est.values[(i, j)], truth[(i, j)]);
                w.write_record([m.group_id.to_string(), i.to_string(), j.to_string(), e.to_string(), t.to_string(), (e - t).abs().to_string(), differenced.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
