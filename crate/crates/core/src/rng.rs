//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a ChaCha20 stream keyed by a
//! 64-bit seed (`ChaCha20Rng::seed_from_u64`). Normal variates use the
//! ziggurat sampler behind `rand_distr::StandardNormal`. Matrices and tensors
//! are filled in storage order (first index fastest), so a fixture is fully
//! determined by its seed, its shape and the number of draws made before it.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::tensor::{DenseTensor, Matrix};

pub type TrRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> TrRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn standard_normal(rng: &mut TrRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut TrRng) -> Result<Matrix> {
    let data = (0..rows * cols).map(|_| standard_normal(rng)).collect();
    Matrix::new(rows, cols, data)
}

pub fn gaussian_tensor(shape: &[usize], rng: &mut TrRng) -> Result<DenseTensor> {
    let len = shape.iter().product::<usize>();
    let data = (0..len).map(|_| standard_normal(rng)).collect();
    DenseTensor::new(shape.to_vec(), data)
}
