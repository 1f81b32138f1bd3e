//! MacKinnon (1994) response-surface p-values for the single-series
//! Dickey-Fuller tau statistic.

use statrs::distribution::{ContinuousCDF, Normal};

use super::adf::Deterministic;

struct Surface {
    max_stat: f64,
    min_stat: f64,
    star_stat: f64,
    small_p: [f64; 3],
    large_p: [f64; 4],
}

const CONSTANT: Surface = Surface {
    max_stat: 2.74,
    min_stat: -18.83,
    star_stat: -1.61,
    small_p: [2.1659, 1.4412, 3.8269e-2],
    large_p: [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2],
};

const CONSTANT_TREND: Surface = Surface {
    max_stat: 0.7,
    min_stat: -16.18,
    star_stat: -2.89,
    small_p: [3.2512, 1.6047, 4.9588e-2],
    large_p: [2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2],
};

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn mackinnon_p(stat: f64, det: Deterministic) -> f64 {
    let s = match det {
        Deterministic::Constant => &CONSTANT,
        Deterministic::ConstantTrend => &CONSTANT_TREND,
    };
    if stat.is_nan() {
        return f64::NAN;
    }
    if stat > s.max_stat {
        return 1.0;
    }
    if stat < s.min_stat {
        return 0.0;
    }
    let z = if stat <= s.star_stat { poly(&s.small_p, stat) } else { poly(&s.large_p, stat) };
    Normal::standard().cdf(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_percent_critical_values() {
        // asymptotic 5% critical values: -2.8615 (constant), -3.4126 (constant + trend)
        assert!((mackinnon_p(-2.8615, Deterministic::Constant) - 0.05).abs() < 1e-3);
        assert!((mackinnon_p(-3.4126, Deterministic::ConstantTrend) - 0.05).abs() < 1e-3);
        assert!((mackinnon_p(-3.4305, Deterministic::Constant) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn continuous_at_switch_point() {
        for det in [Deterministic::Constant, Deterministic::ConstantTrend] {
            let star = match det {
                Deterministic::Constant => CONSTANT.star_stat,
                Deterministic::ConstantTrend => CONSTANT_TREND.star_stat,
            };
            let a = mackinnon_p(star, det);
            let b = mackinnon_p(star + 1e-9, det);
            assert!((a - b).abs() < 2e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn clamped_and_monotone() {
        assert_eq!(mackinnon_p(5.0, Deterministic::Constant), 1.0);
        assert_eq!(mackinnon_p(-40.0, Deterministic::Constant), 0.0);
        let mut prev = 0.0;
        for i in 0..200 {
            let p = mackinnon_p(-18.0 + i as f64 * 0.1, Deterministic::Constant);
            assert!(p >= prev - 1e-12);
            prev = p;
        }
    }
}
