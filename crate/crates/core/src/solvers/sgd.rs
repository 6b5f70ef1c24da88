//! Stochastic gradient descent baseline on sampled tensor entries.

use std::time::Instant;

use rand::Rng;

use super::als::initial_factors;
use super::config::{SolveReport, SolverConfig};
use super::rse;
use crate::error::{Result, TrError};
use crate::rng::rng_from_seed;
use crate::tensor::{DenseTensor, Matrix};
use crate::tr::TRFactors;

/// `½ (x(idx) − Trace ∏ G_n(i_n))²` for one entry.
pub fn entry_loss(factors: &TRFactors, idx: &[usize], target: f64) -> Result<f64> {
    let value = factors.reconstruct_elementwise(idx)?;
    Ok(0.5 * (value - target).powi(2))
}

/// Residual `Trace ∏ G_n(i_n) − x(idx)` and the gradient of [`entry_loss`]
/// with respect to every slice `G_n(i_n)` touched by `idx`.
pub fn entry_gradients(factors: &TRFactors, idx: &[usize], target: f64) -> Result<(f64, Vec<Matrix>)> {
    let order = factors.order();
    let dims = factors.dims();
    if idx.len() != order || idx.iter().zip(&dims).any(|(i, d)| i >= d) {
        return Err(TrError::IndexOutOfRange {
            index: idx.to_vec(),
            shape: dims,
        });
    }
    let r0 = factors.ranks()[0];
    let slices: Vec<Matrix> = idx.iter().enumerate().map(|(n, &i)| factors.slice(n, i)).collect();

    // prefix[k] = S_0 ⋯ S_{k-1}, suffix[k] = S_{k+1} ⋯ S_{N-1}
    let mut prefix = Vec::with_capacity(order);
    prefix.push(Matrix::identity(r0)?);
    for k in 1..order {
        let next = prefix[k - 1].matmul(&slices[k - 1])?;
        prefix.push(next);
    }
    let mut suffix = vec![Matrix::identity(r0)?; order];
    for k in (0..order.saturating_sub(1)).rev() {
        suffix[k] = slices[k + 1].matmul(&suffix[k + 1])?;
    }

    let full = prefix[order - 1].matmul(&slices[order - 1])?;
    let value: f64 = (0..r0).map(|a| full.get(a, a)).sum();
    let residual = value - target;

    // d Tr(A S B) / dS = (B A)^T
    let grads = (0..order)
        .map(|k| {
            let ba = suffix[k].matmul(&prefix[k])?;
            let mut g = ba.transpose();
            g.data_mut().iter_mut().for_each(|v| *v *= residual);
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((residual, grads))
}

/// Plain SGD over uniformly sampled entries (with replacement).
///
/// One sweep-equivalent draws `∏ I_n` entries in mini-batches of
/// `cfg.sgd_batch`; the averaged batch gradient is applied with step
/// `cfg.sgd_step`. The run aborts if the RSE grows beyond ten times its
/// initial value.
pub fn trsgd(x: &DenseTensor, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let ranks = cfg.ranks_for(x.order())?.to_vec();
    if !cfg.sgd_step.is_finite() || cfg.sgd_step < 0.0 {
        return Err(TrError::InvalidConfig(format!("invalid SGD step {}", cfg.sgd_step)));
    }
    if cfg.sgd_batch == 0 {
        return Err(TrError::InvalidConfig("SGD batch size must be positive".into()));
    }
    let start = Instant::now();
    if x.frobenius_norm() == 0.0 {
        let factors = TRFactors::from_shapes(x.shape(), &ranks, DenseTensor::zeros)?;
        return Ok(SolveReport {
            factors,
            rse_history: vec![0.0],
            sweeps_run: 0,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
    }

    let factors = initial_factors(x, &ranks, cfg.seed)?;
    let initial_rse = rse(x, &factors.reconstruct_full())?;
    let mut cores: Vec<DenseTensor> = factors.into_cores();
    let mut grad_buf: Vec<Vec<f64>> = cores.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut touched: Vec<(usize, usize)> = Vec::new();

    let mut rng = rng_from_seed(cfg.seed);
    rng.set_stream(1);
    let total = x.len();
    let steps = total.div_ceil(cfg.sgd_batch);
    let scale = cfg.sgd_step / cfg.sgd_batch as f64;
    let mut history = Vec::with_capacity(cfg.max_sweeps);

    for sweep in 0..cfg.max_sweeps {
        let mut drawn = 0;
        for _ in 0..steps {
            let ring = TRFactors::new(std::mem::take(&mut cores))?;
            let batch = cfg.sgd_batch.min(total - drawn);
            drawn += batch;
            for _ in 0..batch {
                let offset = rng.random_range(0..total);
                let idx = x.multi_index(offset);
                let (_, grads) = entry_gradients(&ring, &idx, x.data()[offset])?;
                for (n, g) in grads.iter().enumerate() {
                    accumulate_slice(&mut grad_buf[n], ring.core(n).shape(), idx[n], g);
                    touched.push((n, idx[n]));
                }
            }
            cores = ring.into_cores();
            touched.sort_unstable();
            touched.dedup();
            for &(n, i) in &touched {
                apply_slice(&mut cores[n], &mut grad_buf[n], i, scale);
            }
            touched.clear();
        }
        let ring = TRFactors::new(std::mem::take(&mut cores))?;
        let err = rse(x, &ring.reconstruct_full())?;
        cores = ring.into_cores();
        history.push(err);
        if !err.is_finite() || err > 10.0 * initial_rse {
            return Err(TrError::Divergence(format!(
                "SGD error {err:.3e} after {} sweeps exceeds ten times the initial {initial_rse:.3e}; \
                 reduce the step size",
                sweep + 1
            )));
        }
        if err < 1e-14 {
            break;
        }
    }

    Ok(SolveReport {
        factors: TRFactors::new(cores)?,
        sweeps_run: history.len(),
        rse_history: history,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

fn accumulate_slice(buf: &mut [f64], shape: &[usize], i: usize, g: &Matrix) {
    let (ra, extent, rb) = (shape[0], shape[1], shape[2]);
    for b in 0..rb {
        for a in 0..ra {
            buf[a + ra * (i + extent * b)] += g.get(a, b);
        }
    }
}

fn apply_slice(core: &mut DenseTensor, buf: &mut [f64], i: usize, scale: f64) {
    let shape = core.shape().to_vec();
    let (ra, extent, rb) = (shape[0], shape[1], shape[2]);
    let data = core.data_mut();
    for b in 0..rb {
        for a in 0..ra {
            let off = a + ra * (i + extent * b);
            data[off] -= scale * buf[off];
            buf[off] = 0.0;
        }
    }
}
