//! Turning raw activity into stationary VAR inputs.

mod adf;
mod frac_diff;
mod mackinnon;
mod preprocess;
mod stationary;

pub use adf::{adf_test, adf_test_with, schwert_max_lag, AdfConfig, AdfResult, Deterministic, MIN_ADF_LEN};
pub use frac_diff::{ffd_weights, ffd_width, frac_diff, frac_diff_with, DEFAULT_WEIGHT_CUTOFF};
pub use mackinnon::mackinnon_p;
pub use preprocess::{preprocess, PreprocessConfig};
pub use stationary::{d_grid, make_stationary, min_stationary_d, StationarityConfig, StationarySeries};
