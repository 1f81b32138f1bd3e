//! Line-oriented commit log parsing.
//!
//! One commit per line, `author|timestamp`. The timestamp is ISO-8601 with
//! an explicit zone, which is what `git log --pretty=format:'%an|%aI'`
//! emits. The space-separated `2019-12-05 10:00:00 +0100` form produced by
//! `--date=iso` is accepted too. Merge and co-authored commits are not
//! deduplicated: every log line counts as one commit.

use std::io::BufRead;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::error::{MiaoError, Result};

/// `git log` arguments producing the accepted line format.
pub const GIT_LOG_ARGS: &[&str] = &["log", "--no-color", "--pretty=format:%an|%aI"];

const BOT_MARKER: &str = "[bot]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub author: String,
    pub timestamp: DateTime<FixedOffset>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

impl LineDiagnostic {
    pub fn into_error(self) -> MiaoError {
        MiaoError::Parse { line: self.line, reason: self.reason }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLog {
    pub records: Vec<CommitRecord>,
    pub diagnostics: Vec<LineDiagnostic>,
}

fn parse_timestamp(raw: &str) -> Option<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(raw)
        .or_else(|_| DateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S %z"))
        .or_else(|_| DateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%z"))
        .ok()
}

/// Parses one line; `None` for blank lines.
pub fn parse_line(line: &str) -> Option<std::result::Result<CommitRecord, String>> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() {
        return None;
    }
    // Author names may contain '|', timestamps never do.
    let Some((author, ts)) = line.rsplit_once('|') else {
        return Some(Err("expected `author|timestamp`".to_string()));
    };
    let author = author.trim();
    if author.is_empty() {
        return Some(Err("empty author".to_string()));
    }
    match parse_timestamp(ts.trim()) {
        Some(timestamp) => Some(Ok(CommitRecord { author: author.to_string(), timestamp })),
        None => Some(Err(format!("unparseable timestamp `{}`", ts.trim()))),
    }
}

pub fn parse_commit_log_str(text: &str) -> ParsedLog {
    let mut out = ParsedLog::default();
    for (i, line) in text.lines().enumerate() {
        match parse_line(line) {
            None => {}
            Some(Ok(rec)) => out.records.push(rec),
            Some(Err(reason)) => out.diagnostics.push(LineDiagnostic { line: i + 1, reason }),
        }
    }
    out
}

pub fn parse_commit_log<R: BufRead>(reader: R) -> Result<ParsedLog> {
    let mut out = ParsedLog::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        match parse_line(&line) {
            None => {}
            Some(Ok(rec)) => out.records.push(rec),
            Some(Err(reason)) => out.diagnostics.push(LineDiagnostic { line: i + 1, reason }),
        }
    }
    Ok(out)
}

pub fn is_bot(author: &str) -> bool {
    author.contains(BOT_MARKER)
}

/// Drops commits whose author contains the literal `[bot]`.
pub fn filter_bots(records: Vec<CommitRecord>) -> Vec<CommitRecord> {
    records.into_iter().filter(|r| !is_bot(&r.author)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_line() {
        let p = parse_commit_log_str("alice|2019-12-05T10:00:00Z");
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].author, "alice");
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn empty_input() {
        let p = parse_commit_log_str("");
        assert!(p.records.is_empty());
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn malformed_line_reported_with_number() {
        let text = "alice|2019-12-05T10:00:00Z\nbob|yesterday\ncarol|2019-12-06 09:00:00 +0900\n";
        let p = parse_commit_log_str(text);
        assert_eq!(p.records.len(), 2);
        assert_eq!(p.diagnostics.len(), 1);
        assert_eq!(p.diagnostics[0].line, 2);
    }

    #[test]
    fn author_with_pipe() {
        let p = parse_commit_log_str("a|b|2020-01-01T00:00:00+02:00");
        assert_eq!(p.records[0].author, "a|b");
    }

    #[test]
    fn reader_matches_str() {
        let text = "x|2020-01-01T00:00:00Z\n\nbad\n";
        let a = parse_commit_log(text.as_bytes()).unwrap();
        assert_eq!(a.records.len(), 1);
        assert_eq!(a.diagnostics[0].line, 3);
    }

    fn rec(author: &str) -> CommitRecord {
        CommitRecord {
            author: author.to_string(),
            timestamp: DateTime::parse_from_rfc3339("2020-01-01T00:00:00Z").unwrap(),
        }
    }

    #[test]
    fn bots_removed() {
        let kept = filter_bots(vec![rec("dependabot[bot]"), rec("github-actions[bot]"), rec("robotics-dev")]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].author, "robotics-dev");
        // case-sensitive literal match
        assert_eq!(filter_bots(vec![rec("Renovate[BOT]")]).len(), 1);
    }

    proptest! {
        #[test]
        fn bot_filter_idempotent(names in proptest::collection::vec("[a-z\\[\\]]{0,12}", 0..30)) {
            let recs: Vec<_> = names.iter().map(|n| rec(n)).collect();
            let once = filter_bots(recs);
            let twice = filter_bots(once.clone());
            prop_assert_eq!(once, twice);
        }
    }
}
