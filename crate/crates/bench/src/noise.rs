//! Additive white Gaussian noise at a prescribed SNR.

use std::fmt;
use std::str::FromStr;

use tensor_ring::rng::{gaussian_tensor, rng_from_seed};
use tensor_ring::{DenseTensor, TrError};

use crate::error::{BenchError, Result};

/// Noise level in decibels, or no noise at all.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { snr_db: None, seed: 0 }
    }

    pub fn db(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db: Some(snr_db),
            seed,
        }
    }

    /// `‖E‖_F / ‖x‖_F` implied by the SNR.
    pub fn relative_level(&self) -> f64 {
        self.snr_db.map_or(0.0, |db| 10f64.powf(-db / 20.0))
    }

    pub fn label(&self) -> String {
        match self.snr_db {
            None => "none".into(),
            Some(db) => format!("{db}dB"),
        }
    }
}

/// Parsed form of one `--snr` entry; the seed is attached later.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrLevel(pub Option<f64>);

impl FromStr for SnrLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(SnrLevel(None));
        }
        let v: f64 = s
            .trim_end_matches("dB")
            .trim_end_matches("db")
            .parse()
            .map_err(|_| format!("bad SNR level `{s}`"))?;
        if !v.is_finite() {
            return Err(format!("SNR must be finite, got `{s}`"));
        }
        Ok(SnrLevel(Some(v)))
    }
}

impl fmt::Display for SnrLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => write!(f, "none"),
            Some(v) => write!(f, "{v}"),
        }
    }
}

/// Returns `x + E` with `E` Gaussian and rescaled so that
/// `10·log10(‖x‖²/‖E‖²) = snr_db` holds exactly.
pub fn add_noise(x: &DenseTensor, spec: &NoiseSpec) -> Result<DenseTensor> {
    let norm = x.frobenius_norm();
    if norm == 0.0 {
        return Err(TrError::ZeroNorm.into());
    }
    let Some(db) = spec.snr_db else {
        return Ok(x.clone());
    };
    if !db.is_finite() {
        return Err(BenchError::Args(format!("SNR must be finite, got {db}")));
    }
    let e = gaussian_tensor(x.shape(), &mut rng_from_seed(spec.seed))?;
    let scale = spec.relative_level() * norm / e.frobenius_norm();
    Ok(x.add(&e.scaled(scale))?)
}
