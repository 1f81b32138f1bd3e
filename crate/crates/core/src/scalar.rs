//! Scalar abstraction for the numeric kernels.
//!
//! VAR estimation, structural identification, impulse responses and
//! fractional differencing are written once against [`Scalar`] and
//! instantiated for `f32` and `f64`. Hypothesis tests and the pipeline run
//! in `f64`.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type usable by the numeric kernels.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + fmt::Display + fmt::Debug + Send + Sync + 'static
{
    /// Converts an `f64` constant into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Tolerance used for rank decisions in least squares and factorizations.
    #[inline]
    fn rank_tol() -> Self {
        Self::default_epsilon().sqrt()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
