//! Commit logs to daily activity series, and group manifests.

mod commit_log;
mod manifest;
mod series;

pub use commit_log::{filter_bots, is_bot, parse_commit_log, parse_commit_log_str, parse_line, CommitRecord, LineDiagnostic, ParsedLog, GIT_LOG_ARGS};
pub use manifest::{
    load_manifest, read_manifest, validate_group, write_manifest, GroupManifest, GroupValidation, ValidatedGroup, MANIFEST_HEADER,
    MIN_OVERLAP_DAYS,
};
pub use series::{
    aggregate_daily, aggregate_span, detect_end_date, project_id_from_stem, read_series_csv, series_file_name, write_series_csv,
    ActivitySeries, CessationRule, SeriesStore,
};
