//! Deterministic tensor-ring solvers minimising `‖X − Ψ(G)‖_F²`.

mod als;
mod config;
mod sgd;
mod svd;

pub use als::{als_gram, als_rhs, trals, trals_from};
pub use config::{AlsInit, SolveReport, SolverConfig};
pub use sgd::{entry_gradients, entry_loss, trsgd};
pub use svd::{trsvd, trsvd_with_budget, SvdBudget};

use crate::error::{Result, TrError};
use crate::tensor::DenseTensor;

/// Relative error `‖x − y‖_F / ‖x‖_F`.
pub fn rse(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    let dist = x.distance(y)?;
    let norm = x.frobenius_norm();
    if norm == 0.0 {
        return Err(TrError::ZeroNorm);
    }
    Ok(dist / norm)
}
