//! Experiment drivers: projection-size sweeps, dataset compression and
//! denoising.

use std::collections::HashMap;
use std::path::Path;

use tensor_ring::{DenseTensor, ProjectionSpec, SolverConfig, TRFactors};

use crate::data::dump_bands;
use crate::error::{BenchError, Result};
use crate::noise::{add_noise, NoiseSpec};
use crate::record::{run_method, Method, RunRecord};

fn require_cube(x: &DenseTensor) -> Result<()> {
    if x.order() != 3 {
        return Err(BenchError::Args(format!(
            "expected a third-order tensor, got shape {:?}",
            x.shape()
        )));
    }
    Ok(())
}

/// Sketch sizes `(s, s, I_3)`, clipped to the extents of the first two modes.
pub fn sweep_spec(shape: &[usize], size: usize, seed: u64) -> ProjectionSpec {
    ProjectionSpec::new(vec![size.min(shape[0]), size.min(shape[1]), shape[2]], seed)
}

/// One record per `(size, method)`, ordered by size then method.
///
/// `svd_tol`, when given, replaces `cfg.tolerance` for trsvd and rtrsvd so
/// that ALS can keep its own stopping threshold. Deterministic methods do
/// not depend on the size; each is run once and its record repeated for
/// every size.
pub fn sweep_projection(
    image: &DenseTensor,
    dataset: &str,
    sizes: &[usize],
    methods: &[Method],
    cfg: &SolverConfig,
    svd_tol: Option<f64>,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    let svd_cfg = SolverConfig {
        tolerance: svd_tol.unwrap_or(cfg.tolerance),
        ..cfg.clone()
    };
    require_cube(image)?;
    if sizes.contains(&0) {
        return Err(BenchError::Args("projection sizes must be positive".into()));
    }
    let mut fixed: HashMap<Method, RunRecord> = HashMap::new();
    let mut records = Vec::with_capacity(sizes.len() * methods.len());
    for &size in sizes {
        let spec = sweep_spec(image.shape(), size, seed);
        for &method in methods {
            if !method.is_randomized() {
                if let Some(r) = fixed.get(&method) {
                    records.push(r.clone());
                    continue;
                }
            }
            let method_cfg = match method {
                Method::Trsvd | Method::Rtrsvd => &svd_cfg,
                _ => cfg,
            };
            let report = run_method(image, method, method_cfg, Some(&spec))?;
            log::info!(
                "{method} size {size}: rse {:.4} in {:.2}s",
                report.final_rse(),
                report.elapsed_seconds
            );
            let rec = RunRecord::new(
                method,
                dataset,
                Some(&spec),
                &report.factors,
                image,
                report.elapsed_seconds,
                seed,
            )?;
            if !method.is_randomized() {
                fixed.insert(method, rec.clone());
            }
            records.push(rec);
        }
    }
    Ok(records)
}

/// Decomposes a whole dataset tensor; returns the record and the factors.
pub fn compress_dataset(
    x: &DenseTensor,
    dataset: &str,
    method: Method,
    cfg: &SolverConfig,
    spec: Option<&ProjectionSpec>,
) -> Result<(RunRecord, TRFactors)> {
    let report = run_method(x, method, cfg, spec)?;
    let rec = RunRecord::new(
        method,
        dataset,
        spec,
        &report.factors,
        x,
        report.elapsed_seconds,
        cfg.seed,
    )?;
    Ok((rec, report.factors))
}

/// Decomposes noisy copies of `clean` and scores each result against the
/// clean cube. The dataset column reads `{dataset}@{noise}`. With `dump`,
/// writes PGM bands of the clean, noisy and reconstructed cubes.
pub fn denoise_hsi(
    clean: &DenseTensor,
    dataset: &str,
    noises: &[NoiseSpec],
    methods: &[Method],
    cfg: &SolverConfig,
    spec: &ProjectionSpec,
    dump: Option<&Path>,
) -> Result<Vec<RunRecord>> {
    require_cube(clean)?;
    if let Some(dir) = dump {
        dump_bands(clean, dir, "clean")?;
    }
    let mut records = Vec::new();
    for noise in noises {
        let noisy = add_noise(clean, noise)?;
        let label = noise.label();
        if let Some(dir) = dump {
            dump_bands(&noisy, dir, &format!("noisy_{label}"))?;
        }
        for &method in methods {
            let report = run_method(&noisy, method, cfg, Some(spec))?;
            let rec = RunRecord::new(
                method,
                &format!("{dataset}@{label}"),
                Some(spec),
                &report.factors,
                clean,
                report.elapsed_seconds,
                cfg.seed,
            )?;
            log::info!("{method} at {label}: rse {:.4}", rec.rse);
            if let Some(dir) = dump {
                dump_bands(&report.factors.reconstruct_full(), dir, &format!("{method}_{label}"))?;
            }
            records.push(rec);
        }
    }
    Ok(records)
}
