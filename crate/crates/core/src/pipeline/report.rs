//! Distribution summaries of the per-window estimation diagnostics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::run::GroupReport;
use crate::error::Result;

pub const SUMMARY_ROWS: [&str; 10] = ["count", "mean", "std", "min", "10%", "25%", "50%", "75%", "90%", "max"];

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "adf_statistic",
    "adf_p_value",
    "frac_order",
    "sample_size",
    "lag",
    "aic",
    "bic",
    "hqic",
    "lb_max_lag",
    "lb_statistic",
    "lb_p_value",
];

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// count, mean, sample std, min, deciles/quartiles, max.
pub fn describe(values: &[f64]) -> [f64; 10] {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt() } else { f64::NAN };
    [
        n,
        mean,
        std,
        quantile(&v, 0.0),
        quantile(&v, 0.10),
        quantile(&v, 0.25),
        quantile(&v, 0.50),
        quantile(&v, 0.75),
        quantile(&v, 0.90),
        quantile(&v, 1.0),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittingSummary {
    /// `columns[c][r]`: statistic `SUMMARY_ROWS[r]` of `SUMMARY_COLUMNS[c]`.
    pub columns: Vec<[f64; 10]>,
}

/// Series-level ADF columns over every series of every window; model-level
/// columns over every window.
pub fn fitting_summary<'a>(reports: impl IntoIterator<Item = &'a GroupReport>) -> FittingSummary {
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); SUMMARY_COLUMNS.len()];
    for r in reports {
        for w in &r.windows {
            for s in &w.series {
                cols[0].push(s.adf_statistic);
                cols[1].push(s.adf_p_value);
                cols[2].push(s.frac_order);
            }
            let model = [w.sample_size as f64, w.lag as f64, w.aic, w.bic, w.hqic, w.lb_max_lag as f64, w.lb_statistic, w.lb_p_value];
            for (k, v) in model.into_iter().enumerate() {
                cols[3 + k].push(v);
            }
        }
    }
    FittingSummary { columns: cols.iter().map(|c| describe(c)).collect() }
}

impl FittingSummary {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["statistic"];
        header.extend(SUMMARY_COLUMNS);
        wtr.write_record(&header)?;
        for (r, name) in SUMMARY_ROWS.iter().enumerate() {
            let mut row = vec![name.to_string()];
            row.extend(self.columns.iter().map(|c| format!("{:.2}", c[r])));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.1), 1.4);
        assert_eq!(quantile(&v, 0.25), 2.0);
        let d = describe(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(d[0], 4.0);
        assert_eq!(d[1], 2.5);
        assert_eq!(d[3], 1.0);
        assert_eq!(d[9], 4.0);
    }
}
