//! `miao ingest`: commit logs or pre-aggregated CSVs into a series directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::FixedOffset;
use clap::Args;
use log::{info, warn};
use miao_core::ingest::{
    aggregate_span, detect_end_date, filter_bots, parse_commit_log, project_id_from_stem, read_series_csv, CessationRule, SeriesStore,
};

use crate::rundir;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Commit logs, one `author|timestamp` line per commit. The file stem
    /// names the project (`owner__repo.log` is `owner/repo`).
    #[arg(long, num_args = 1..)]
    pub logs: Vec<PathBuf>,
    /// Pre-aggregated `date,count` files, named like the logs.
    #[arg(long, num_args = 1..)]
    pub csv: Vec<PathBuf>,
    /// Zone for daily bucketing, e.g. `+09:00`.
    #[arg(long, default_value = "+00:00")]
    pub zone: String,
    /// Keep commits by `[bot]` authors.
    #[arg(long)]
    pub keep_bots: bool,
    /// Treat a malformed log line as fatal instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn stem_id(p: &Path) -> Result<String> {
    let stem = p.file_stem().and_then(|s| s.to_str()).with_context(|| format!("no file name in {}", p.display()))?;
    Ok(project_id_from_stem(stem))
}

fn parse_zone(s: &str) -> Result<FixedOffset> {
    let probe = format!("2000-01-01T00:00:00{}", if s.eq_ignore_ascii_case("utc") || s == "Z" { "+00:00" } else { s });
    Ok(*chrono::DateTime::parse_from_rfc3339(&probe).with_context(|| format!("bad zone `{s}`"))?.offset())
}

pub fn run(args: &IngestArgs) -> Result<bool> {
    if args.logs.is_empty() && args.csv.is_empty() {
        bail!("nothing to ingest: pass --logs or --csv");
    }
    let zone = parse_zone(&args.zone)?;
    let mut store = SeriesStore::new();
    let mut skipped_lines = 0usize;
    for p in &args.logs {
        let id = stem_id(p)?;
        let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
        let parsed = parse_commit_log(std::io::BufReader::new(f))?;
        for d in &parsed.diagnostics {
            if args.strict {
                bail!("{}: line {}: {}", p.display(), d.line, d.reason);
            }
            warn!("{}: line {}: {}", p.display(), d.line, d.reason);
        }
        skipped_lines += parsed.diagnostics.len();
        let total = parsed.records.len();
        let records = if args.keep_bots { parsed.records } else { filter_bots(parsed.records) };
        info!("{id}: {} commits, {} from bots dropped", records.len(), total - records.len());
        store.insert(aggregate_span(&id, &records, zone, None)?);
    }
    for p in &args.csv {
        let id = stem_id(p)?;
        let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
        store.insert(read_series_csv(&id, f)?);
    }
    let dir = rundir::create(&args.out, "ingest")?;
    store.save_dir(&dir.join("series"))?;
    let mut w = csv::Writer::from_writer(rundir::writer(&dir, "end_dates.csv")?);
    w.write_record(["project", "start_date", "last_day", "total_commits", "cessation_date"])?;
    for s in store.iter() {
        let end = if s.len() >= 365 { detect_end_date(s, &CessationRule::default())?.map(|d| d.to_string()) } else { None };
        w.write_record([s.project_id().to_string(), s.start_date().to_string(), s.end_date().to_string(), s.total().to_string(), end.unwrap_or_default()])?;
    }
    w.flush()?;
    println!("{}", dir.display());
    Ok(skipped_lines > 0)
}
