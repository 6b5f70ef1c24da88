//! Synthetic test data.

use tensor_ring::rng::rng_from_seed;
use tensor_ring::{DenseTensor, TRFactors};

use crate::error::Result;

/// Tensor of exact TR-rank `ranks`, reconstructed from seeded Gaussian cores
/// and rescaled to unit maximum magnitude.
pub fn low_rank_tensor(dims: &[usize], ranks: &[usize], seed: u64) -> Result<DenseTensor> {
    let factors = TRFactors::random(dims, ranks, &mut rng_from_seed(seed))?;
    let x = factors.reconstruct_full();
    let peak = x.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(if peak > 0.0 { x.scaled(1.0 / peak) } else { x })
}
