//! VAR estimation, lag selection and structural identification.

mod lag;
mod model;
mod svar;

pub use lag::{
    best_lag, feasible_max_lag, information_criteria, information_criteria_table, ljung_box, ljung_box_lags,
    ljung_box_series, IcTable, InfoCriterion, LagCandidate, LagSearch, LagSearchConfig, LagSelection, LjungBox,
    Whiteness, select_lag,
};
pub use model::{fit_var_ols, fit_var_ols_from, stack_series, VarModel, STABILITY_MARGIN};
pub use svar::{identify_svar, validate_ordering, ShockSize, SvarModel};
