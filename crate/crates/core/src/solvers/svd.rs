//! Sequential truncated-SVD construction of a tensor ring.
//!
//! The first SVD acts on the mode-0 unfolding and its rank `r` is split into
//! the closing pair `(R_0, R_1)`. The remaining modes are peeled off one SVD
//! at a time, with `R_0` carried along as the trailing index so the last core
//! closes the ring. Each of the `N − 1` truncations may discard squared
//! singular values up to `(τ‖X‖_F)² / N`; since every left factor is
//! orthonormal the discarded energies add up exactly to the squared error.

use std::time::Instant;

use ndarray::{Array2, ShapeBuilder};
use ndarray_linalg::{JobSvd, SVDDC};

use super::config::{SolveReport, SolverConfig};
use super::rse;
use crate::error::{Result, TrError};
use crate::rng::{rng_from_seed, standard_normal, TrRng};
use crate::tensor::{DenseTensor, Matrix};
use crate::tr::TRFactors;

/// Truncation bookkeeping of one TR-SVD run.
#[derive(Clone, Debug)]
pub struct SvdBudget {
    /// Per-step threshold `δ = τ‖X‖_F / √N` on the discarded tail norm.
    pub threshold: f64,
    /// Sum of squared discarded singular values, one entry per SVD.
    pub discarded_sq: Vec<f64>,
    pub norm_sq: f64,
}

impl SvdBudget {
    /// Upper bound on RSE² implied by the discarded singular values.
    pub fn rse_sq_bound(&self) -> f64 {
        if self.norm_sq == 0.0 {
            return 0.0;
        }
        self.discarded_sq.iter().sum::<f64>() / self.norm_sq
    }
}

pub fn trsvd(x: &DenseTensor, cfg: &SolverConfig) -> Result<SolveReport> {
    trsvd_with_budget(x, cfg).map(|(report, _)| report)
}

/// TR-SVD with automatic ranks driven by `cfg.tolerance`.
pub fn trsvd_with_budget(x: &DenseTensor, cfg: &SolverConfig) -> Result<(SolveReport, SvdBudget)> {
    cfg.validate()?;
    let start = Instant::now();
    let dims = x.shape().to_vec();
    let order = dims.len();
    let norm_sq = x.squared_norm();
    let threshold = cfg.tolerance * norm_sq.sqrt() / (order as f64).sqrt();
    let mut budget = SvdBudget {
        threshold,
        discarded_sq: Vec::new(),
        norm_sq,
    };

    if norm_sq == 0.0 {
        let factors = TRFactors::from_shapes(&dims, &vec![1; order], DenseTensor::zeros)?;
        let report = SolveReport {
            factors,
            rse_history: vec![0.0],
            sweeps_run: 1,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        };
        return Ok((report, budget));
    }
    if order == 1 {
        let core = DenseTensor::new(vec![1, dims[0], 1], x.data().to_vec())?;
        let report = SolveReport {
            factors: TRFactors::new(vec![core])?,
            rse_history: vec![0.0],
            sweeps_run: 1,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        };
        return Ok((report, budget));
    }

    let mut cores = Vec::with_capacity(order);

    // First step: mode-0 unfolding, rank split into the ring closure.
    let rest = x.len() / dims[0];
    let (u, s, vt) = truncated_svd(x.data(), dims[0], rest, threshold, &mut budget)?;
    let r = s.len();
    let (r0, r1) = split_rank(r);
    cores.push(DenseTensor::fold_classic(&u, 1, &[r0, dims[0], r1])?);
    let carried = DenseTensor::new(vec![r0, r1, rest], scale_rows(&vt, &s))?.permute(&[1, 2, 0])?;
    let mut current = carried.into_data();
    let mut r_k = r1;

    for &extent in &dims[1..order - 1] {
        let rows = r_k * extent;
        let cols = current.len() / rows;
        let (u, s, vt) = truncated_svd(&current, rows, cols, threshold, &mut budget)?;
        let r_next = s.len();
        cores.push(DenseTensor::new(vec![r_k, extent, r_next], u.into_data())?);
        current = scale_rows(&vt, &s);
        r_k = r_next;
    }
    cores.push(DenseTensor::new(vec![r_k, dims[order - 1], r0], current)?);

    let factors = TRFactors::new(cores)?;
    let err = rse(x, &factors.reconstruct_full())?;
    let report = SolveReport {
        factors,
        rse_history: vec![err],
        sweeps_run: 1,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, budget))
}

/// Splits `r = R_0 · R_1` with `R_0` the divisor of `r` nearest `⌊√r⌋`,
/// ties going to the smaller divisor.
pub(crate) fn split_rank(r: usize) -> (usize, usize) {
    let target = (r as f64).sqrt().floor() as usize;
    let best = (1..=r)
        .filter(|d| r.is_multiple_of(*d))
        .min_by_key(|&d| (d.abs_diff(target), d))
        .unwrap_or(1);
    (best, r / best)
}

/// Smallest rank `r ≥ 1` whose discarded tail satisfies `Σ_{i≥r} σ_i² ≤ δ²`.
pub(crate) fn truncation_rank(singular: &[f64], threshold: f64) -> usize {
    let limit = threshold * threshold;
    let mut tail = 0.0;
    let mut r = singular.len();
    while r > 1 {
        let next = tail + singular[r - 1] * singular[r - 1];
        if next > limit {
            break;
        }
        tail = next;
        r -= 1;
    }
    r
}

type Truncated = (Matrix, Vec<f64>, Matrix);

fn full_svd(data: &[f64], rows: usize, cols: usize) -> Result<(Array2<f64>, Vec<f64>, Array2<f64>)> {
    let a = Array2::from_shape_vec((rows, cols).f(), data.to_vec())
        .map_err(|e| TrError::DimensionMismatch(e.to_string()))?;
    let (u, s, vt) = a.svddc(JobSvd::Some)?;
    match (u, vt) {
        (Some(u), Some(vt)) => Ok((u, s.to_vec(), vt)),
        _ => Err(TrError::Linalg("SVD returned no singular vectors".into())),
    }
}

fn truncated_svd(data: &[f64], rows: usize, cols: usize, threshold: f64, budget: &mut SvdBudget) -> Result<Truncated> {
    let (u, s, vt) = full_svd(data, rows, cols)?;
    let r = truncation_rank(&s, threshold);
    budget.discarded_sq.push(s[r..].iter().map(|v| v * v).sum::<f64>());
    let u = Matrix::from_array(u.slice(ndarray::s![.., ..r]))?;
    let vt = Matrix::from_array(vt.slice(ndarray::s![..r, ..]))?;
    Ok((u, s[..r].to_vec(), vt))
}

/// Rank-`r` SVD. Missing directions (rank of the data below `r`) get random
/// left vectors and zero singular values, so the product is unchanged.
fn fixed_svd(data: &[f64], rows: usize, cols: usize, r: usize, rng: &mut TrRng) -> Result<Truncated> {
    let (u, s, vt) = full_svd(data, rows, cols)?;
    let keep = r.min(s.len());
    let u = Matrix::from_fn(rows, r, |i, j| {
        if j < keep {
            u[[i, j]]
        } else {
            standard_normal(rng) / (rows as f64).sqrt()
        }
    })?;
    let vt = Matrix::from_fn(r, cols, |i, j| if i < keep { vt[[i, j]] } else { 0.0 })?;
    let mut sv = s[..keep].to_vec();
    sv.resize(r, 0.0);
    Ok((u, sv, vt))
}

/// TR-SVD with prescribed ranks, used to start ALS. `ranks[0]·ranks[1]` is
/// kept at the first step and `ranks[k+1]` at step `k`.
pub(crate) fn fixed_rank_factors(x: &DenseTensor, ranks: &[usize], seed: u64) -> Result<TRFactors> {
    let dims = x.shape().to_vec();
    let order = dims.len();
    if ranks.len() != order || order < 2 {
        return Err(TrError::InvalidConfig(format!(
            "fixed-rank TR-SVD needs one rank per mode and at least two modes, got {ranks:?}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let (r0, r1) = (ranks[0], ranks[1]);
    let rest = x.len() / dims[0];
    let (u, s, vt) = fixed_svd(x.data(), dims[0], rest, r0 * r1, &mut rng)?;
    let mut cores = Vec::with_capacity(order);
    cores.push(DenseTensor::fold_classic(&u, 1, &[r0, dims[0], r1])?);
    let carried = DenseTensor::new(vec![r0, r1, rest], scale_rows(&vt, &s))?.permute(&[1, 2, 0])?;
    let mut current = carried.into_data();
    let mut r_k = r1;
    for k in 1..order - 1 {
        let rows = r_k * dims[k];
        let cols = current.len() / rows;
        let (u, s, vt) = fixed_svd(&current, rows, cols, ranks[k + 1], &mut rng)?;
        cores.push(DenseTensor::new(vec![r_k, dims[k], ranks[k + 1]], u.into_data())?);
        current = scale_rows(&vt, &s);
        r_k = ranks[k + 1];
    }
    cores.push(DenseTensor::new(vec![r_k, dims[order - 1], r0], current)?);
    TRFactors::new(cores)
}

/// `diag(s) · vt`, returned in column-major order.
fn scale_rows(vt: &Matrix, s: &[f64]) -> Vec<f64> {
    let mut out = vt.data().to_vec();
    for col in out.chunks_exact_mut(vt.rows()) {
        for (v, sv) in col.iter_mut().zip(s) {
            *v *= sv;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_split_rule() {
        assert_eq!(split_rank(1), (1, 1));
        assert_eq!(split_rank(6), (2, 3));
        assert_eq!(split_rank(12), (3, 4));
        assert_eq!(split_rank(16), (4, 4));
        assert_eq!(split_rank(7), (1, 7));
        // floor(sqrt(8)) = 2 divides 8
        assert_eq!(split_rank(8), (2, 4));
        // floor(sqrt(15)) = 3 divides 15
        assert_eq!(split_rank(15), (3, 5));
        // floor(sqrt(10)) = 3; divisors 2 and 5 are at distance 1 and 2
        assert_eq!(split_rank(10), (2, 5));
    }

    #[test]
    fn truncation_rule() {
        let s = [3.0, 2.0, 1.0, 0.5];
        assert_eq!(truncation_rank(&s, 0.0), 4);
        assert_eq!(truncation_rank(&s, 0.5), 3);
        assert_eq!(truncation_rank(&s, 1.2), 2);
        assert_eq!(truncation_rank(&s, 100.0), 1);
    }

    #[test]
    fn fixed_ranks_are_kept_and_padded() {
        let mut rng = crate::rng::rng_from_seed(6);
        // an open chain (R_0 = 1) is captured exactly
        let f = TRFactors::random(&[5, 6, 4], &[1, 2, 3], &mut rng).unwrap();
        let x = f.reconstruct_full();
        let g = fixed_rank_factors(&x, &[1, 2, 3], 0).unwrap();
        assert_eq!(g.ranks(), vec![1, 2, 3]);
        assert!(rse(&x, &g.reconstruct_full()).unwrap() < 1e-10);
        // rank-1 data with larger requested ranks: padded, still exact
        let f = TRFactors::random(&[5, 6, 4], &[1, 1, 1], &mut rng).unwrap();
        let x = f.reconstruct_full();
        let g = fixed_rank_factors(&x, &[2, 3, 2], 0).unwrap();
        assert_eq!(g.ranks(), vec![2, 3, 2]);
        assert!(rse(&x, &g.reconstruct_full()).unwrap() < 1e-10);
        assert!(fixed_rank_factors(&x, &[2, 2], 0).is_err());
    }

    #[test]
    fn order_one_is_exact() {
        let x = DenseTensor::new(vec![4], vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let report = trsvd(&x, &SolverConfig::with_tolerance(0.1)).unwrap();
        assert_eq!(report.factors.reconstruct_full(), x);
    }

    #[test]
    fn vacuous_tolerance_gives_rank_one() {
        let mut rng = crate::rng::rng_from_seed(5);
        let x = crate::rng::gaussian_tensor(&[4, 5, 6], &mut rng).unwrap();
        let report = trsvd(&x, &SolverConfig::with_tolerance(2.0)).unwrap();
        assert_eq!(report.factors.ranks(), vec![1, 1, 1]);
        assert!(report.final_rse() <= 1.0);
    }
}
