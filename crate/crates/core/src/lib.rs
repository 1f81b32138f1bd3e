//! Mutual impact analysis of competing open-source projects.
//!
//! Daily activity series are made stationary, fitted with a recursively
//! identified structural VAR, and summarized as signed long-run impulse
//! responses between every ordered pair of projects. Scores feed a small
//! decision-tree classifier that separates groups where one project ceased
//! under competitive pressure from the rest.

pub mod classify;
pub mod config;
pub mod error;
pub mod ingest;
pub mod irf;
pub mod linalg;
pub mod pipeline;
pub mod prep;
pub mod scalar;
pub mod synth;
pub mod var;

pub use error::{MiaoError, Result};
pub use scalar::Scalar;

pub type VarModel64 = var::VarModel<f64>;
pub type VarModel32 = var::VarModel<f32>;
pub type SvarModel64 = var::SvarModel<f64>;
pub type SvarModel32 = var::SvarModel<f32>;
pub type IrfTensor64 = irf::IrfTensor<f64>;
pub type IrfTensor32 = irf::IrfTensor<f32>;
pub type SceMatrix64 = irf::SceMatrix<f64>;
pub type SceMatrix32 = irf::SceMatrix<f32>;
