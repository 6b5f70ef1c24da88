//! Alternating least squares over the cores of a tensor ring.
//!
//! Updating core `n` with the others fixed is the linear least-squares
//! problem `X_<n> ≈ G_n,(2) · S^T`, where `S = (G_≠n)_<2>` has one row per
//! multi-index of the remaining modes. `S` is never formed: the right-hand
//! side `X_<n> S` is contracted core by core and the normal matrix `S^T S`
//! comes from per-core Gram tensors, so memory stays proportional to the
//! input tensor.

use std::time::Instant;

use ndarray::{linalg::general_mat_mul, s, Array2, ArrayView2, ShapeBuilder};
use ndarray_linalg::{cholesky::Cholesky, Diag, Eigh, SolveTriangular, UPLO};

use super::config::{AlsInit, SolveReport, SolverConfig};
use super::rse;
use super::svd::fixed_rank_factors;
use crate::error::{Result, TrError};
use crate::rng::{rng_from_seed, standard_normal};
use crate::tensor::{DenseTensor, Matrix};
use crate::tr::{merge_chain, TRFactors};

/// Tensor-ring ALS with fixed ranks.
///
/// Starts from a rank-truncated TR-SVD (or seeded Gaussian cores, see
/// [`AlsInit`]). Each sweep updates the cores in order and then tries an
/// extrapolation along the change made by the sweep. Stops after
/// `max_sweeps` sweeps, when the relative RSE change between two sweeps
/// drops below `tolerance`, or when the fit is exact to machine precision
/// or a sweep fails to lower the error.
/// With `als_starts > 1` the run with the lowest final RSE is returned.
pub fn trals(x: &DenseTensor, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let ranks = cfg.ranks_for(x.order())?.to_vec();
    let start = Instant::now();

    let norm = x.frobenius_norm();
    if norm == 0.0 {
        let factors = TRFactors::from_shapes(x.shape(), &ranks, DenseTensor::zeros)?;
        return Ok(SolveReport {
            factors,
            rse_history: vec![0.0],
            sweeps_run: 0,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
    }

    let mut best: Option<SolveReport> = None;
    for k in 0..cfg.als_starts {
        let factors = match cfg.als_init {
            AlsInit::Svd if k == 0 && x.order() >= 2 => fixed_rank_factors(x, &ranks, cfg.seed)?,
            _ => initial_factors(x, &ranks, cfg.seed.wrapping_add(k as u64))?,
        };
        let report = run_sweeps(x, cfg, factors, start)?;
        log::debug!("als start {k}: rse {:.3e}", report.final_rse());
        if best.as_ref().is_none_or(|b| report.final_rse() < b.final_rse()) {
            best = Some(report);
        }
    }
    let mut best = best.expect("at least one start");
    best.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(best)
}

/// ALS started from the given factors instead of a random draw; their ranks
/// take precedence over `cfg.ranks`.
pub fn trals_from(x: &DenseTensor, cfg: &SolverConfig, init: TRFactors) -> Result<SolveReport> {
    cfg.validate()?;
    if init.dims() != x.shape() {
        return Err(TrError::ShapeMismatch {
            left: x.shape().to_vec(),
            right: init.dims(),
        });
    }
    if x.frobenius_norm() == 0.0 {
        return Err(TrError::ZeroNorm);
    }
    run_sweeps(x, cfg, init, Instant::now())
}

fn run_sweeps(x: &DenseTensor, cfg: &SolverConfig, mut factors: TRFactors, start: Instant) -> Result<SolveReport> {
    let unfoldings = (0..x.order()).map(|n| x.unfold_tr(n)).collect::<Result<Vec<_>>>()?;

    let mut history: Vec<f64> = Vec::with_capacity(cfg.max_sweeps);
    let mut ls_step = 1.5f64;
    for sweep in 1..=cfg.max_sweeps {
        let before = factors.clone();
        for (n, unfolded) in unfoldings.iter().enumerate() {
            factors = update_core(&factors, unfolded, n)?;
        }
        let mut err = rse(x, &factors.reconstruct_full())?;
        // Line search along the sweep direction, accepted only when it
        // lowers the error; the step grows after a success.
        if sweep > 1 && err.is_finite() {
            let mut best: Option<(f64, f64, TRFactors)> = None;
            for step in [ls_step, 2.0 * ls_step] {
                let jump = extrapolate(&before, &factors, step)?;
                let jump_err = rse(x, &jump.reconstruct_full())?;
                if jump_err < best.as_ref().map_or(err, |b| b.0) {
                    best = Some((jump_err, step, jump));
                }
            }
            match best {
                Some((jump_err, step, jump)) => {
                    factors = jump;
                    err = jump_err;
                    ls_step = (1.5 * step).min(64.0);
                }
                None => ls_step = (ls_step / 2.0).max(1.25),
            }
        }
        if !err.is_finite() {
            return Err(TrError::Divergence(format!(
                "ALS produced a non-finite error after {} sweeps",
                history.len() + 1
            )));
        }
        let prev = history.last().copied();
        // An exact sweep cannot raise the error, so a rise is round-off:
        // keep the previous factors and stop.
        if prev.is_some_and(|p| err > p) {
            factors = before;
            break;
        }
        history.push(err);
        if err < 1e-14 {
            break;
        }
        if let Some(prev) = prev {
            if (prev - err).abs() < cfg.tolerance * prev {
                break;
            }
        }
    }

    Ok(SolveReport {
        factors,
        sweeps_run: history.len(),
        rse_history: history,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `old + step·(new − old)`, core by core.
fn extrapolate(old: &TRFactors, new: &TRFactors, step: f64) -> Result<TRFactors> {
    let cores = old
        .cores()
        .iter()
        .zip(new.cores())
        .map(|(o, n)| {
            let data = o.data().iter().zip(n.data()).map(|(a, b)| a + step * (b - a)).collect();
            DenseTensor::new(o.shape().to_vec(), data)
        })
        .collect::<Result<Vec<_>>>()?;
    TRFactors::new(cores)
}

/// Gaussian cores scaled so that reconstructed entries have roughly the
/// root-mean-square magnitude of `x`.
pub(crate) fn initial_factors(x: &DenseTensor, ranks: &[usize], seed: u64) -> Result<TRFactors> {
    let n = x.order() as f64;
    let rms = x.frobenius_norm() / (x.len() as f64).sqrt();
    let paths: f64 = ranks.iter().map(|&r| r as f64).product();
    let scale = (rms / paths.sqrt()).powf(1.0 / n);
    let mut rng = rng_from_seed(seed);
    TRFactors::from_shapes(x.shape(), ranks, |shape| {
        let len = shape.iter().product::<usize>();
        let data = (0..len).map(|_| scale * standard_normal(&mut rng)).collect();
        DenseTensor::new(shape.to_vec(), data)
    })
}

fn update_core(factors: &TRFactors, unfolded: &Matrix, n: usize) -> Result<TRFactors> {
    let rhs = als_rhs(unfolded, factors, n)?;
    let gram = als_gram(factors, n)?;
    let solved = solve_normal(&gram, &rhs)?;
    let core = factors.core(n);
    let updated = DenseTensor::fold_classic(&solved, 1, core.shape())?;
    let mut cores = factors.cores().to_vec();
    cores[n] = updated;
    TRFactors::new(cores)
}

/// `X_<n> · (G_≠n)_<2>` for the TR unfolding `unfolded` of the target.
///
/// The result is `I_n × R_n R_{n+1}` with column `c + R_n·a` pairing the
/// leading rank index `c` of core `n` with its trailing index `a`.
pub fn als_rhs(unfolded: &Matrix, factors: &TRFactors, n: usize) -> Result<Matrix> {
    let order = factors.order();
    let dims = factors.dims();
    let ranks = factors.ranks();
    if n >= order {
        return Err(TrError::ModeOutOfRange { mode: n, order });
    }
    let next = (n + 1) % order;
    let prev = (n + order - 1) % order;
    let (i_n, r_n, r_next) = (dims[n], ranks[n], ranks[next]);
    let rest: usize = dims
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != n)
        .map(|(_, d)| d)
        .product();
    if unfolded.rows() != i_n || unfolded.cols() != rest {
        return Err(TrError::DimensionMismatch(format!(
            "unfolding is {}x{}, expected {i_n}x{rest}",
            unfolded.rows(),
            unfolded.cols()
        )));
    }

    let mut rhs = Array2::<f64>::zeros((i_n, r_n * r_next).f());
    if order == 1 {
        for i in 0..i_n {
            for c in 0..r_n {
                rhs[[i, c + r_n * c]] = unfolded.get(i, 0);
            }
        }
        return Matrix::from_array(rhs.view());
    }

    let data = unfolded.data();
    if order == 2 || dims[prev] <= dims[next] {
        // Slice the trailing core of the chain; its index is the slowest
        // column index of X_<n>, so each slice is a contiguous block.
        let chain: Vec<&DenseTensor> = (1..order - 1).map(|k| factors.core((n + k) % order)).collect();
        let partial = if chain.is_empty() {
            identity_chain(r_next)?
        } else {
            merge_chain(&chain)?
        };
        let r_prev = ranks[prev];
        let inner = partial.shape()[1];
        let pm = partial.unfold_tr(1)?;
        let mut t = Array2::<f64>::zeros((i_n, r_prev * r_next).f());
        for k in 0..dims[prev] {
            let block = &data[k * i_n * inner..(k + 1) * i_n * inner];
            let xk = ArrayView2::from_shape((i_n, inner).f(), block).expect("column block");
            general_mat_mul(1.0, &xk, &pm.view(), 0.0, &mut t);
            let slice = factors.slice(prev, k);
            for a in 0..r_next {
                let tb = t.slice(s![.., a * r_prev..(a + 1) * r_prev]);
                let mut bb = rhs.slice_mut(s![.., a * r_n..(a + 1) * r_n]);
                general_mat_mul(1.0, &tb, &slice.view(), 1.0, &mut bb);
            }
        }
    } else {
        // Slice the leading core; its index is the fastest column index, so
        // each slice is a strided view.
        let chain: Vec<&DenseTensor> = (2..order).map(|k| factors.core((n + k) % order)).collect();
        let partial = merge_chain(&chain)?;
        let r_after = ranks[(n + 2) % order];
        let inner = partial.shape()[1];
        let pm = partial.unfold_classic(1)?;
        let i_first = dims[next];
        let mut t = Array2::<f64>::zeros((i_n, r_after * r_n).f());
        for k in 0..i_first {
            let xk = ArrayView2::from_shape((i_n, inner).strides((1, i_n * i_first)), &data[k * i_n..])
                .expect("strided column view");
            general_mat_mul(1.0, &xk, &pm.view(), 0.0, &mut t);
            let slice = factors.slice(next, k);
            for c in 0..r_n {
                let tb = t.slice(s![.., c * r_after..(c + 1) * r_after]);
                let mut bb = rhs.slice_mut(s![.., c..;r_n]);
                general_mat_mul(1.0, &tb, &slice.view().t(), 1.0, &mut bb);
            }
        }
    }
    Matrix::from_array(rhs.view())
}

/// Normal matrix `S^T S` of the core-`n` subproblem, with rows and columns
/// indexed like the columns of [`als_rhs`].
pub fn als_gram(factors: &TRFactors, n: usize) -> Result<Matrix> {
    let order = factors.order();
    if n >= order {
        return Err(TrError::ModeOutOfRange { mode: n, order });
    }
    let ranks = factors.ranks();
    let r_n = ranks[n];
    let r_next = ranks[(n + 1) % order];
    let m = r_n * r_next;

    // E[(d + R_{n+1} d'), (c + R_n c')] = Σ_j P_j[d, c] P_j[d', c'] over the
    // chain products P_j; an empty chain is the identity.
    let transfer = if order == 1 {
        Array2::<f64>::eye(r_n * r_n)
    } else {
        let mut acc: Option<Array2<f64>> = None;
        for k in 1..order {
            let e = core_transfer(factors.core((n + k) % order))?;
            acc = Some(match acc {
                None => e,
                Some(prev) => prev.dot(&e),
            });
        }
        acc.expect("chain has at least one core")
    };

    let mut gram = Matrix::zeros(m, m)?;
    for d in 0..r_next {
        for c in 0..r_n {
            for dp in 0..r_next {
                for cp in 0..r_n {
                    let v = transfer[[d + r_next * dp, c + r_n * cp]];
                    gram.set(c + r_n * d, cp + r_n * dp, v);
                }
            }
        }
    }
    Ok(gram)
}

/// `Σ_i G(i) ⊗ G(i)` laid out as `(a + R a') × (b + R' b')`.
fn core_transfer(core: &DenseTensor) -> Result<Array2<f64>> {
    let (ra, rb) = (core.shape()[0], core.shape()[2]);
    let m = core.unfold_classic(1)?;
    let mtm = m.view().t().dot(&m.view());
    let mut e = Array2::<f64>::zeros((ra * ra, rb * rb));
    for b in 0..rb {
        for a in 0..ra {
            for bp in 0..rb {
                for ap in 0..ra {
                    e[[a + ra * ap, b + rb * bp]] = mtm[[a + ra * b, ap + ra * bp]];
                }
            }
        }
    }
    Ok(e)
}

fn identity_chain(r: usize) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(&[r, 1, r])?;
    for a in 0..r {
        t.set(&[a, 0, a], 1.0)?;
    }
    Ok(t)
}

/// Solves `G · gram = rhs` for symmetric positive (semi)definite `gram`.
///
/// Falls back to a ridge of `1e-12 · trace / m` on the diagonal when the
/// Cholesky factor is numerically singular.
fn solve_normal(gram: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let g = gram.view().to_owned();
    let bt = rhs.view().t().to_owned();
    let gt = match g.cholesky(UPLO::Lower) {
        // gram · G^T = rhs^T, via L Y = rhs^T and L^T G^T = Y
        Ok(l) if well_conditioned(&l) => {
            let y = l.solve_triangular(UPLO::Lower, Diag::NonUnit, &bt)?;
            l.t().to_owned().solve_triangular(UPLO::Upper, Diag::NonUnit, &y)?
        }
        // Rank-deficient: minimum-norm solution through the pseudo-inverse,
        // still an exact minimiser since rhs lies in the range of gram.
        _ => {
            let (vals, vecs) = g.eigh(UPLO::Lower)?;
            let cutoff = 1e-12 * vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut proj = vecs.t().dot(&bt);
            for (mut row, &lam) in proj.rows_mut().into_iter().zip(vals.iter()) {
                let inv = if lam > cutoff { 1.0 / lam } else { 0.0 };
                row.mapv_inplace(|v| v * inv);
            }
            vecs.dot(&proj)
        }
    };
    Matrix::from_array(gt.t())
}

fn well_conditioned(l: &Array2<f64>) -> bool {
    let diag: Vec<f64> = l.diag().iter().map(|v| v.abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    max > 0.0 && min.is_finite() && (min / max).powi(2) > 1e-14
}
