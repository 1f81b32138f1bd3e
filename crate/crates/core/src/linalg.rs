//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::DMatrix;

use crate::error::{MiaoError, Result};
use crate::scalar::Scalar;

/// Lower Cholesky factor of a symmetric matrix.
///
/// A pivot is rejected when it falls below `rel_tol` times the matching
/// diagonal entry of `a`; the index of the failing pivot is returned.
pub fn cholesky_lower<T: Scalar>(a: &DMatrix<T>, rel_tol: T) -> std::result::Result<DMatrix<T>, usize> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut s = a[(j, j)];
        for k in 0..j {
            s -= l[(j, k)] * l[(j, k)];
        }
        let floor = rel_tol * a[(j, j)].abs();
        if !(s > floor) || !(s > T::zero()) {
            return Err(j);
        }
        let d = s.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut t = a[(i, j)];
            for k in 0..j {
                t -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = t / d;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ X = B` given the lower factor `L`.
pub fn cholesky_solve<T: Scalar>(l: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    let mut x = b.clone();
    for c in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Ordinary least squares fit of every column of `y` on the columns of `x`.
#[derive(Debug, Clone)]
pub struct LeastSquares<T: Scalar> {
    /// `k × m` coefficients.
    pub coef: DMatrix<T>,
    /// `rows × m` residuals.
    pub residuals: DMatrix<T>,
    /// Cholesky factor of `XᵀX`, kept for coefficient standard errors.
    pub gram_factor: DMatrix<T>,
}

impl<T: Scalar> LeastSquares<T> {
    /// Diagonal of `(XᵀX)⁻¹`.
    pub fn gram_inverse_diag(&self) -> Vec<T> {
        let k = self.gram_factor.nrows();
        let inv = cholesky_solve(&self.gram_factor, &DMatrix::identity(k, k));
        (0..k).map(|i| inv[(i, i)]).collect()
    }

    pub fn ssr(&self, col: usize) -> T {
        self.residuals.column(col).iter().fold(T::zero(), |acc, &e| acc + e * e)
    }
}

pub fn least_squares<T: Scalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> Result<LeastSquares<T>> {
    if x.nrows() != y.nrows() {
        return Err(MiaoError::Dimension(format!(
            "design has {} rows, response has {}",
            x.nrows(),
            y.nrows()
        )));
    }
    if x.nrows() <= x.ncols() {
        return Err(MiaoError::TooShort { needed: x.ncols() + 1, got: x.nrows() });
    }
    let xt = x.transpose();
    let gram = &xt * x;
    let xty = &xt * y;
    let gram_factor = cholesky_lower(&gram, T::rank_tol() * T::rank_tol() * T::lit(1e4))
        .map_err(|_| MiaoError::Collinear)?;
    let coef = cholesky_solve(&gram_factor, &xty);
    let residuals = y - x * &coef;
    Ok(LeastSquares { coef, residuals, gram_factor })
}

/// Solves the normal equations from precomputed cross products.
pub fn solve_normal_equations<T: Scalar>(gram: &DMatrix<T>, xty: &DMatrix<T>) -> Result<DMatrix<T>> {
    let l = cholesky_lower(gram, T::rank_tol() * T::rank_tol() * T::lit(1e4))
        .map_err(|_| MiaoError::Collinear)?;
    Ok(cholesky_solve(&l, xty))
}

/// Natural log of the determinant of a symmetric positive-definite matrix.
pub fn log_det_spd<T: Scalar>(a: &DMatrix<T>) -> Result<T> {
    let l = cholesky_lower(a, T::zero()).map_err(|_| MiaoError::Singular("log-determinant of a non-positive-definite matrix".into()))?;
    Ok((0..l.nrows()).fold(T::zero(), |acc, i| acc + l[(i, i)].ln()) * T::lit(2.0))
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    if m.iter().all(|v| *v == T::zero()) {
        return T::zero();
    }
    m.complex_eigenvalues()
        .iter()
        .map(|c| (c.re * c.re + c.im * c.im).sqrt())
        .fold(T::zero(), |a, b| a.max(b))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue<T: Scalar>(a: &DMatrix<T>) -> T {
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or_else(|| T::lit(f64::MAX)), |a, b| a.min(b))
}

pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]);
        let l = cholesky_lower(&a, 0.0).unwrap();
        let back = &l * l.transpose();
        assert!((back - &a).abs().max() < 1e-12);
        assert_eq!(l[(0, 1)], 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(cholesky_lower(&a, 0.0).unwrap_err(), 1);
    }

    #[test]
    fn least_squares_exact_line() {
        let x = DMatrix::from_fn(10, 2, |r, c| if c == 0 { 1.0 } else { r as f64 });
        let y = DMatrix::from_fn(10, 1, |r, _| 3.0 - 0.5 * r as f64);
        let fit = least_squares(&x, &y).unwrap();
        assert!((fit.coef[(0, 0)] - 3.0).abs() < 1e-10);
        assert!((fit.coef[(1, 0)] + 0.5).abs() < 1e-10);
        assert!(fit.ssr(0) < 1e-18);
    }

    #[test]
    fn duplicate_columns_are_collinear() {
        let x = DMatrix::from_fn(20, 3, |r, c| if c == 0 { 1.0 } else { ((r * 7) % 5) as f64 });
        let y = DMatrix::from_fn(20, 1, |r, _| r as f64);
        assert!(matches!(least_squares(&x, &y), Err(MiaoError::Collinear)));
    }

    #[test]
    fn radius_of_rotation_is_one() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((spectral_radius(&m) - 1.0f64).abs() < 1e-12);
        let z = DMatrix::<f32>::zeros(3, 3);
        assert_eq!(spectral_radius(&z), 0.0);
    }

    #[test]
    fn log_det_matches_product() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let ld: f64 = log_det_spd(&a).unwrap();
        assert!((ld - (2.0f64 - 0.25).ln()).abs() < 1e-12);
    }
}
