//! Randomized tensor-ring decomposition through per-mode Gaussian sketches.
//!
//! Each mode is sketched in turn against the current, already shrunk working
//! tensor `P`: `Y = P_(n) Ω`, `Q_n = qr(Y)`, `P ← P ×_n Q_n^T`. The small
//! tensor is decomposed by a deterministic solver and every core is lifted
//! back along its physical mode, `G_n = Z_n ×_2 Q_n`.

use std::time::Instant;

use ndarray_linalg::QR;

use crate::error::{Result, TrError};
use crate::rng::{gaussian_matrix, rng_from_seed};
use crate::solvers::{rse, trals, trsvd, SolveReport, SolverConfig};
use crate::tensor::{DenseTensor, Matrix};
use crate::tr::TRFactors;

/// Target extent per mode and the seed of the sketching stream.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionSpec {
    /// `K_n`; a value equal to `I_n` leaves that mode untouched.
    pub sketch_dims: Vec<usize>,
    pub seed: u64,
}

impl ProjectionSpec {
    pub fn new(sketch_dims: Vec<usize>, seed: u64) -> Self {
        Self { sketch_dims, seed }
    }

    /// No projection on any mode.
    pub fn identity(shape: &[usize]) -> Self {
        Self::new(shape.to_vec(), 0)
    }

    pub fn validate(&self, shape: &[usize]) -> Result<()> {
        if self.sketch_dims.len() != shape.len() {
            return Err(TrError::InvalidProjection(format!(
                "{} sketch sizes for an order-{} tensor",
                self.sketch_dims.len(),
                shape.len()
            )));
        }
        for (n, (&k, &i)) in self.sketch_dims.iter().zip(shape).enumerate() {
            if k == 0 || k > i {
                return Err(TrError::InvalidProjection(format!(
                    "sketch size {k} for mode {n} must lie in 1..={i}"
                )));
            }
        }
        Ok(())
    }
}

/// Projected tensor together with the orthonormal basis of every mode.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchResult {
    pub projected: DenseTensor,
    /// `I_n × K_n` bases; identity for skipped modes.
    pub bases: Vec<Matrix>,
}

impl SketchResult {
    /// `P ×_0 Q_0 ×_1 Q_1 ⋯`, the approximation of the input carried by the sketch.
    pub fn lift(&self) -> Result<DenseTensor> {
        let mut t = self.projected.clone();
        for (n, q) in self.bases.iter().enumerate() {
            if !q.is_identity() {
                t = t.mode_n_product(n, q)?;
            }
        }
        Ok(t)
    }
}

/// Sketches every mode of `x` in order.
pub fn sketch(x: &DenseTensor, spec: &ProjectionSpec) -> Result<SketchResult> {
    spec.validate(x.shape())?;
    let mut rng = rng_from_seed(spec.seed);
    let mut working = x.clone();
    let mut bases = Vec::with_capacity(x.order());
    for (n, &k) in spec.sketch_dims.iter().enumerate() {
        let extent = x.shape()[n];
        if k == extent {
            bases.push(Matrix::identity(extent)?);
            continue;
        }
        let unfolded = working.unfold_classic(n)?;
        let omega = gaussian_matrix(unfolded.cols(), k, &mut rng)?;
        let range = unfolded.matmul(&omega)?;
        let q = orthonormal_basis(&range)?;
        working = working.mode_n_product(n, &q.transpose())?;
        bases.push(q);
    }
    Ok(SketchResult {
        projected: working,
        bases,
    })
}

/// Economy QR with the diagonal of `R` made non-negative, so `Q` is unique.
fn orthonormal_basis(y: &Matrix) -> Result<Matrix> {
    let (q, r) = y.view().qr()?;
    let mut q = Matrix::from_array(q.view())?;
    for j in 0..q.cols() {
        if r[[j, j]] < 0.0 {
            for i in 0..q.rows() {
                let v = q.get(i, j);
                q.set(i, j, -v);
            }
        }
    }
    Ok(q)
}

/// Lifts each small core along its middle mode: `G_n = Z_n ×_2 Q_n`.
pub fn back_project(small: &TRFactors, bases: &[Matrix]) -> Result<TRFactors> {
    if bases.len() != small.order() {
        return Err(TrError::DimensionMismatch(format!(
            "{} bases for {} cores",
            bases.len(),
            small.order()
        )));
    }
    let cores = small
        .cores()
        .iter()
        .zip(bases)
        .enumerate()
        .map(|(n, (core, q))| {
            if q.cols() != core.shape()[1] {
                return Err(TrError::DimensionMismatch(format!(
                    "core {n} has middle extent {} but basis has {} columns",
                    core.shape()[1],
                    q.cols()
                )));
            }
            if q.is_identity() {
                Ok(core.clone())
            } else {
                core.mode_n_product(1, q)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    TRFactors::new(cores)
}

/// Solver applied to the projected tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallSolver {
    Als,
    Svd,
}

/// Sketch, solve small, back-project.
///
/// `rse_history` holds the solver's history on the projected tensor followed
/// by one final entry measured against `x` itself.
pub fn rtrd(x: &DenseTensor, cfg: &SolverConfig, spec: &ProjectionSpec, solver: SmallSolver) -> Result<SolveReport> {
    cfg.validate()?;
    spec.validate(x.shape())?;
    if let Some(ranks) = &cfg.ranks {
        for (n, (&r, &k)) in ranks.iter().zip(&spec.sketch_dims).enumerate() {
            if r > k {
                log::warn!("rank {r} exceeds sketch size {k} on mode {n}");
            }
        }
    }
    let start = Instant::now();
    let sk = sketch(x, spec)?;
    let small = match solver {
        SmallSolver::Als => trals(&sk.projected, cfg)?,
        SmallSolver::Svd => trsvd(&sk.projected, cfg)?,
    };
    let factors = back_project(&small.factors, &sk.bases)?;
    let mut history = small.rse_history;
    if x.frobenius_norm() > 0.0 {
        history.push(rse(x, &factors.reconstruct_full())?);
    } else {
        history.push(0.0);
    }
    Ok(SolveReport {
        factors,
        rse_history: history,
        sweeps_run: small.sweeps_run,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn rtrals(x: &DenseTensor, cfg: &SolverConfig, spec: &ProjectionSpec) -> Result<SolveReport> {
    rtrd(x, cfg, spec, SmallSolver::Als)
}

pub fn rtrsvd(x: &DenseTensor, cfg: &SolverConfig, spec: &ProjectionSpec) -> Result<SolveReport> {
    rtrd(x, cfg, spec, SmallSolver::Svd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian_tensor;

    #[test]
    fn spec_validation() {
        let spec = ProjectionSpec::new(vec![2, 5], 0);
        assert!(spec.validate(&[3, 4]).is_err());
        assert!(spec.validate(&[3, 5, 2]).is_err());
        assert!(ProjectionSpec::new(vec![0, 2], 0).validate(&[3, 4]).is_err());
        assert!(ProjectionSpec::new(vec![3, 2], 0).validate(&[3, 4]).is_ok());
    }

    #[test]
    fn full_sizes_are_identity() {
        let x = gaussian_tensor(&[4, 5, 3], &mut rng_from_seed(1)).unwrap();
        let sk = sketch(&x, &ProjectionSpec::identity(x.shape())).unwrap();
        assert_eq!(sk.projected, x);
        assert!(sk.bases.iter().all(Matrix::is_identity));
        assert_eq!(sk.lift().unwrap(), x);
    }

    #[test]
    fn bases_have_non_negative_r_diagonal() {
        let x = gaussian_tensor(&[9, 8, 7], &mut rng_from_seed(2)).unwrap();
        let sk = sketch(&x, &ProjectionSpec::new(vec![4, 3, 7], 5)).unwrap();
        assert_eq!(sk.projected.shape(), &[4, 3, 7]);
        assert_eq!(sk.bases[0].rows(), 9);
        assert_eq!(sk.bases[0].cols(), 4);
        for q in &sk.bases {
            assert!(q.orthonormality_defect() < 1e-10);
        }
    }

    #[test]
    fn identity_back_projection_is_exact() {
        let z = TRFactors::random(&[3, 4], &[2, 2], &mut rng_from_seed(3)).unwrap();
        let bases = vec![Matrix::identity(3).unwrap(), Matrix::identity(4).unwrap()];
        assert_eq!(back_project(&z, &bases).unwrap(), z);
        assert!(back_project(&z, &bases[..1]).is_err());
        let wrong = vec![Matrix::identity(3).unwrap(), Matrix::identity(5).unwrap()];
        assert!(back_project(&z, &wrong).is_err());
    }
}
