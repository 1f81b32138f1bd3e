//! Recursive (Cholesky) identification of structural shocks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::VarModel;
use crate::error::{MiaoError, Result};
use crate::linalg::{cholesky_lower, min_symmetric_eigenvalue};
use crate::scalar::Scalar;

/// Size of the structural impulse fed into the impulse responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockSize {
    /// Unit shock: each variable moves by one of its own units on impact.
    #[default]
    Unit,
    /// One standard deviation of the structural shock.
    StdDev,
}

/// A VAR with a recursive contemporaneous structure.
///
/// Shock `j` is the structural innovation of variable `j`. `b0_inv` and
/// `shock_scale` are indexed in the original variable order; permuted by
/// `ordering` the impact matrix is lower triangular with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct SvarModel<T: Scalar> {
    pub var: VarModel<T>,
    /// `ordering[k]` is the variable placed k-th in the causal chain.
    pub ordering: Vec<usize>,
    pub b0_inv: DMatrix<T>,
    /// Standard deviation of each structural shock.
    pub shock_scale: DVector<T>,
}

impl<T: Scalar> SvarModel<T> {
    pub fn dim(&self) -> usize {
        self.b0_inv.nrows()
    }

    /// Impact matrix in causal order (lower triangular, unit diagonal).
    pub fn ordered_b0_inv(&self) -> DMatrix<T> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, b| self.b0_inv[(self.ordering[a], self.ordering[b])])
    }

    /// Contemporaneous response of every variable to every shock.
    pub fn impact(&self, size: ShockSize) -> DMatrix<T> {
        match size {
            ShockSize::Unit => self.b0_inv.clone(),
            ShockSize::StdDev => &self.b0_inv * DMatrix::from_diagonal(&self.shock_scale),
        }
    }

    /// `B₀⁻¹ diag(σ²) B₀⁻ᵀ`, which equals the reduced-form covariance.
    pub fn implied_covariance(&self) -> DMatrix<T> {
        let p = self.impact(ShockSize::StdDev);
        &p * p.transpose()
    }
}

pub fn validate_ordering(ordering: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if ordering.len() != n {
        return Err(MiaoError::Dimension(format!("ordering has {} entries for {n} variables", ordering.len())));
    }
    for &k in ordering {
        if k >= n || seen[k] {
            return Err(MiaoError::Invalid(format!("ordering {ordering:?} is not a permutation of 0..{n}")));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Factorizes the residual covariance under the causal `ordering`.
pub fn identify_svar<T: Scalar>(var: VarModel<T>, ordering: &[usize]) -> Result<SvarModel<T>> {
    let n = var.dim();
    validate_ordering(ordering, n)?;
    let sigma = &var.resid_cov;
    let permuted = DMatrix::from_fn(n, n, |a, b| sigma[(ordering[a], ordering[b])]);
    let p = cholesky_lower(&permuted, T::default_epsilon() * T::lit(100.0)).map_err(|_| MiaoError::NotPositiveDefinite {
        eigenvalue: min_symmetric_eigenvalue(sigma).as_f64(),
    })?;
    let mut b0_inv = DMatrix::zeros(n, n);
    let mut shock_scale = DVector::zeros(n);
    for b in 0..n {
        let d = p[(b, b)];
        shock_scale[ordering[b]] = d;
        for a in 0..n {
            b0_inv[(ordering[a], ordering[b])] = p[(a, b)] / d;
        }
    }
    Ok(SvarModel { var, ordering: ordering.to_vec(), b0_inv, shock_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(cov: DMatrix<f64>) -> VarModel<f64> {
        let n = cov.nrows();
        VarModel::from_coefficients(vec![DMatrix::zeros(n, n)], DVector::zeros(n), cov).unwrap()
    }

    #[test]
    fn identity_covariance() {
        let s = identify_svar(model(DMatrix::identity(3, 3)), &[0, 1, 2]).unwrap();
        assert_eq!(s.b0_inv, DMatrix::identity(3, 3));
        assert_eq!(s.shock_scale, DVector::from_element(3, 1.0));
    }

    #[test]
    fn two_variable_example() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let s = identify_svar(model(cov.clone()), &[0, 1]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 1.0]);
        assert!((&s.b0_inv - expect).abs().max() < 1e-12);
        assert!((s.shock_scale[0] - 1.0).abs() < 1e-12);
        assert!((s.shock_scale[1] - 0.75f64.sqrt()).abs() < 1e-12);
        // reversed order puts the zero above the diagonal
        let r = identify_svar(model(cov), &[1, 0]).unwrap();
        assert_eq!(r.b0_inv[(1, 0)], 0.0);
        assert!((r.b0_inv[(0, 1)] - 0.5).abs() < 1e-12);
        assert_eq!(r.ordered_b0_inv()[(0, 1)], 0.0);
    }

    #[test]
    fn rejects_indefinite() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match identify_svar(model(cov), &[0, 1]) {
            Err(MiaoError::NotPositiveDefinite { eigenvalue }) => assert!((eigenvalue + 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_ordering() {
        assert!(identify_svar(model(DMatrix::identity(2, 2)), &[0, 0]).is_err());
        assert!(identify_svar(model(DMatrix::identity(2, 2)), &[0]).is_err());
    }

    fn spd3() -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(-2.0f64..2.0, 9).prop_map(|v| {
            let m = DMatrix::from_row_slice(3, 3, &v);
            &m * m.transpose() + DMatrix::identity(3, 3) * 0.1
        })
    }

    fn orderings() -> impl Strategy<Value = Vec<usize>> {
        Just(vec![0usize, 1, 2]).prop_shuffle()
    }

    proptest! {
        #[test]
        fn reconstructs_covariance(cov in spd3(), ord in orderings()) {
            let s = identify_svar(model(cov.clone()), &ord).unwrap();
            let err = (s.implied_covariance() - &cov).abs().max();
            prop_assert!(err < 1e-8 * (1.0 + cov.abs().max()));
            let o = s.ordered_b0_inv();
            for a in 0..3 {
                prop_assert!((o[(a, a)] - 1.0).abs() < 1e-12);
                for b in a + 1..3 {
                    prop_assert_eq!(o[(a, b)], 0.0);
                }
            }
        }
    }
}
