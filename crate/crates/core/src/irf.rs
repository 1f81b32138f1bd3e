//! Impulse responses, shock cumulative effects and raw influence scores.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MiaoError, Result};
use crate::linalg::{max_abs, spectral_radius};
use crate::scalar::Scalar;
use crate::var::{ShockSize, SvarModel, VarModel, STABILITY_MARGIN};

/// Longest truncated sum used when the closed form does not apply.
pub const SCE_MAX_TERMS: usize = 1000;
/// Truncation stops once every response is below this magnitude.
pub const SCE_TOLERANCE: f64 = 1e-10;

/// `Ψ_0 .. Ψ_K` of the moving-average representation.
pub fn vma_coefficients<T: Scalar>(coeffs: &[DMatrix<T>], horizon: usize) -> Vec<DMatrix<T>> {
    let n = coeffs.first().map_or(0, |a| a.nrows());
    let mut psi: Vec<DMatrix<T>> = Vec::with_capacity(horizon + 1);
    psi.push(DMatrix::identity(n, n));
    for k in 1..=horizon {
        let mut acc = DMatrix::zeros(n, n);
        for (i, a) in coeffs.iter().enumerate().take(k) {
            acc += &psi[k - i - 1] * a;
        }
        psi.push(acc);
    }
    psi
}

pub fn var_vma<T: Scalar>(var: &VarModel<T>, horizon: usize) -> Vec<DMatrix<T>> {
    if var.coeffs.is_empty() {
        let n = var.dim();
        let mut psi = vec![DMatrix::zeros(n, n); horizon + 1];
        psi[0] = DMatrix::identity(n, n);
        return psi;
    }
    vma_coefficients(&var.coeffs, horizon)
}

/// `responses[k][(i, j)]`: response of variable `i`, `k` periods after a shock in `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct IrfTensor<T: Scalar> {
    pub responses: Vec<DMatrix<T>>,
}

impl<T: Scalar> IrfTensor<T> {
    pub fn horizon(&self) -> usize {
        self.responses.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.responses.first().map_or(0, |m| m.nrows())
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.responses[k][(i, j)]
    }

    /// Response path of `i` to a shock in `j` for `k = 0..=K`.
    pub fn trace(&self, i: usize, j: usize) -> Vec<T> {
        self.responses.iter().map(|m| m[(i, j)]).collect()
    }

    /// Largest elementwise gap to another tensor over the shared horizons.
    pub fn max_abs_diff(&self, other: &IrfTensor<T>) -> T {
        self.responses
            .iter()
            .zip(&other.responses)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Impulse responses from lag matrices and an impact matrix.
pub fn impulse_response_from<T: Scalar>(coeffs: &[DMatrix<T>], impact: &DMatrix<T>, horizon: usize) -> IrfTensor<T> {
    let psi = if coeffs.is_empty() {
        let n = impact.nrows();
        let mut psi = vec![DMatrix::zeros(n, n); horizon + 1];
        psi[0] = DMatrix::identity(n, n);
        psi
    } else {
        vma_coefficients(coeffs, horizon)
    };
    IrfTensor { responses: psi.into_iter().map(|p| p * impact).collect() }
}

/// Responses to unit structural shocks.
pub fn impulse_response<T: Scalar>(svar: &SvarModel<T>, horizon: usize) -> IrfTensor<T> {
    impulse_response_sized(svar, horizon, ShockSize::Unit)
}

pub fn impulse_response_sized<T: Scalar>(svar: &SvarModel<T>, horizon: usize, size: ShockSize) -> IrfTensor<T> {
    impulse_response_from(&svar.var.coeffs, &svar.impact(size), horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SceMethod {
    ClosedForm,
    /// Partial sum of `terms` responses; `converged` is false when the
    /// term limit was hit before the responses fell below tolerance.
    Truncated { terms: usize, converged: bool },
}

/// `values[(i, j)] = Σ_{k≥1} IRF_ij(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct SceMatrix<T: Scalar> {
    pub values: DMatrix<T>,
    pub method: SceMethod,
}

impl<T: Scalar> SceMatrix<T> {
    pub fn is_truncated(&self) -> bool {
        matches!(self.method, SceMethod::Truncated { .. })
    }
}

fn coeff_sum<T: Scalar>(coeffs: &[DMatrix<T>], n: usize) -> DMatrix<T> {
    coeffs.iter().fold(DMatrix::zeros(n, n), |acc, a| acc + a)
}

fn companion<T: Scalar>(coeffs: &[DMatrix<T>], n: usize) -> DMatrix<T> {
    let p = coeffs.len().max(1);
    let mut c = DMatrix::zeros(n * p, n * p);
    for (i, a) in coeffs.iter().enumerate() {
        c.view_mut((0, i * n), (n, n)).copy_from(a);
    }
    for i in n..n * p {
        c[(i, i - n)] = T::one();
    }
    c
}

/// `((I - Σ A_i)⁻¹ - I) · impact`.
pub fn closed_form_sce<T: Scalar>(coeffs: &[DMatrix<T>], impact: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = impact.nrows();
    let lhs = DMatrix::<T>::identity(n, n) - coeff_sum(coeffs, n);
    let x = lhs
        .lu()
        .solve(impact)
        .ok_or_else(|| MiaoError::Singular("I - ΣA is singular although the VAR is stable".into()))?;
    Ok(x - impact)
}

/// Sums responses `k = 1..=max_terms`, stopping early once every entry of
/// the responses is below `tol` in magnitude.
pub fn truncated_sce<T: Scalar>(coeffs: &[DMatrix<T>], impact: &DMatrix<T>, max_terms: usize, tol: T) -> SceMatrix<T> {
    let n = impact.nrows();
    let p = coeffs.len();
    let mut psi: Vec<DMatrix<T>> = vec![DMatrix::identity(n, n)];
    let mut acc = DMatrix::zeros(n, n);
    let mut terms = 0;
    let mut converged = false;
    let mut quiet = 0;
    for k in 1..=max_terms {
        let mut next = DMatrix::zeros(n, n);
        for i in 1..=p.min(k) {
            next += &psi[k - i] * &coeffs[i - 1];
        }
        let resp = &next * impact;
        acc += &resp;
        terms = k;
        psi.push(next);
        // a single small response can be followed by larger ones when some
        // lag matrices vanish, so require p quiet steps in a row
        quiet = if max_abs(&resp) < tol { quiet + 1 } else { 0 };
        if quiet >= p.max(1) {
            converged = true;
            break;
        }
    }
    SceMatrix { values: acc, method: SceMethod::Truncated { terms, converged } }
}

/// Closed form when the VAR is stable, truncated sum otherwise.
pub fn sce_from<T: Scalar>(coeffs: &[DMatrix<T>], impact: &DMatrix<T>) -> Result<SceMatrix<T>> {
    let n = impact.nrows();
    let radius = if coeffs.is_empty() { T::zero() } else { spectral_radius(&companion(coeffs, n)) };
    if radius < T::one() - T::lit(STABILITY_MARGIN) {
        Ok(SceMatrix { values: closed_form_sce(coeffs, impact)?, method: SceMethod::ClosedForm })
    } else {
        Ok(truncated_sce(coeffs, impact, SCE_MAX_TERMS, T::lit(SCE_TOLERANCE)))
    }
}

/// Cumulative effect of unit structural shocks.
pub fn sce<T: Scalar>(svar: &SvarModel<T>) -> Result<SceMatrix<T>> {
    sce_sized(svar, ShockSize::Unit)
}

pub fn sce_sized<T: Scalar>(svar: &SvarModel<T>, size: ShockSize) -> Result<SceMatrix<T>> {
    sce_from(&svar.var.coeffs, &svar.impact(size))
}

/// `MS_ij = -Σ_m SCE_ji^(m)`. The diagonal is set to zero and carries no meaning.
pub fn raw_miao_scores<T: Scalar>(sce_per_window: &[DMatrix<T>]) -> Result<DMatrix<T>> {
    let n = sce_per_window
        .first()
        .map(|m| m.nrows())
        .ok_or_else(|| MiaoError::Invalid("no windows to score".into()))?;
    let mut ms = DMatrix::zeros(n, n);
    for s in sce_per_window {
        if s.nrows() != n || s.ncols() != n {
            return Err(MiaoError::Dimension(format!("expected {n}×{n} SCE, got {}×{}", s.nrows(), s.ncols())));
        }
        ms -= s.transpose();
    }
    ms.fill_diagonal(T::zero());
    Ok(ms)
}
