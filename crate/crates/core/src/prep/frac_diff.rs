//! Fixed-window fractional differencing.

use crate::error::{MiaoError, Result};
use crate::scalar::Scalar;

pub const DEFAULT_WEIGHT_CUTOFF: f64 = 1e-4;

const MAX_WINDOW: usize = 1_000_000;

/// Binomial weights `w_0 = 1, w_k = -w_{k-1} (d - k + 1) / k`, truncated
/// before the first weight with `|w_k| < cutoff`.
pub fn ffd_weights<T: Scalar>(d: T, cutoff: T) -> Vec<T> {
    let mut w = vec![T::one()];
    let mut k = 1usize;
    while k < MAX_WINDOW {
        let kk = T::from_count(k);
        let next = -w[k - 1] * (d - kk + T::one()) / kk;
        if next.abs() < cutoff {
            break;
        }
        w.push(next);
        k += 1;
    }
    w
}

/// Width of the weight window for `d` (the warm-up is one less).
pub fn ffd_width(d: f64, cutoff: f64) -> usize {
    ffd_weights(d, cutoff).len()
}

pub fn frac_diff<T: Scalar>(values: &[T], d: T) -> Result<Vec<T>> {
    frac_diff_with(values, d, T::lit(DEFAULT_WEIGHT_CUTOFF))
}

/// `out[t] = Σ_k w_k x[t + width - 1 - k]`; the first `width - 1` inputs are consumed as warm-up.
pub fn frac_diff_with<T: Scalar>(values: &[T], d: T, cutoff: T) -> Result<Vec<T>> {
    if !(d >= T::zero() && d <= T::one()) {
        return Err(MiaoError::FracOrder(d.as_f64()));
    }
    let w = ffd_weights(d, cutoff);
    let width = w.len();
    if values.len() < width {
        return Err(MiaoError::TooShort { needed: width, got: values.len() });
    }
    Ok((width - 1..values.len())
        .map(|t| w.iter().enumerate().fold(T::zero(), |acc, (k, wk)| acc + *wk * values[t - k]))
        .collect())
}
