use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Subtract day-of-week means.
    pub weekly_adjustment: bool,
}

/// Optional seasonal adjustment ahead of stationarity testing.
///
/// Identity unless weekly adjustment is enabled, in which case each value
/// has the mean of its weekday (over the given slice) subtracted.
pub fn preprocess(values: &[f64], start: NaiveDate, cfg: &PreprocessConfig) -> Vec<f64> {
    if !cfg.weekly_adjustment {
        return values.to_vec();
    }
    let weekday = |i: usize| (start + Duration::days(i as i64)).weekday().num_days_from_monday() as usize;
    let mut sums = [0.0f64; 7];
    let mut counts = [0usize; 7];
    for (i, v) in values.iter().enumerate() {
        sums[weekday(i)] += v;
        counts[weekday(i)] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(counts).map(|(s, c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
    values.iter().enumerate().map(|(i, v)| v - means[weekday(i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monday() -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
    }

    #[test]
    fn identity_by_default() {
        let v = vec![3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(preprocess(&v, monday(), &PreprocessConfig::default()), v);
    }

    #[test]
    fn weekly_pattern_removed() {
        let on = PreprocessConfig { weekly_adjustment: true };
        // 7 on Mondays, 1 otherwise, plus a few extra days
        let v: Vec<f64> = (0..73).map(|i| if i % 7 == 0 { 7.0 } else { 1.0 }).collect();
        let out = preprocess(&v, monday(), &on);
        for wd in 0..7 {
            let (s, n) = out.iter().enumerate().filter(|(i, _)| i % 7 == wd).fold((0.0, 0), |(s, n), (_, x)| (s + x, n + 1));
            assert!((s / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_becomes_zero() {
        let on = PreprocessConfig { weekly_adjustment: true };
        let out = preprocess(&[4.0; 30], monday(), &on);
        assert!(out.iter().all(|x| *x == 0.0));
    }
}
