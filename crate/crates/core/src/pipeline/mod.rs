//! Windows, shifts and splits around the per-window estimation, and the
//! reduction of cumulative effects into normalized score tables.

mod ordering;
mod phase;
mod report;
mod run;
mod score;
mod window;

pub use ordering::{Role, RoleOrdering, REV_ORDERING, SET_ORDERINGS};
pub use phase::{
    fit_window, identify, miao_phase1, miao_phase2, normalize_sce, sample_std, GroupData, Phase1, Phase2, SeriesDiagnostics,
    SplitScores, WindowDiagnostics, WindowFit,
};
pub use report::{describe, fitting_summary, quantile, FittingSummary, SUMMARY_COLUMNS, SUMMARY_ROWS};
pub use run::{orderings_for_sets, run_group, run_groups, GroupOutcome, GroupReport, OrderedScores, SplitRecord};
pub use score::{classify_m_case, m_case, read_scores_csv, write_scores_csv, MCase, ScoreTable, Stage, SCORE_CSV_HEADER};
pub use window::{add_years, build_segments, build_windows, mask_final_year, period_end, shift_window, whole_years, AnalysisWindow, Segment};
