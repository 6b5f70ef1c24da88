//! Methods, measurement records and their CSV form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use tensor_ring::{
    compression_ratio, rse, rtrals, rtrsvd, trals, trsgd, trsvd, DenseTensor, ProjectionSpec, SolveReport,
    SolverConfig, TRFactors,
};

use crate::error::{BenchError, Result};

pub const CSV_HEADER: &str = "method,dataset,K,ranks,rse,cr,seconds,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Trals,
    Trsvd,
    Trsgd,
    Rtrals,
    Rtrsvd,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Trals,
        Method::Trsvd,
        Method::Trsgd,
        Method::Rtrals,
        Method::Rtrsvd,
    ];

    pub fn is_randomized(self) -> bool {
        matches!(self, Method::Rtrals | Method::Rtrsvd)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Trals => "trals",
            Method::Trsvd => "trsvd",
            Method::Trsgd => "trsgd",
            Method::Rtrals => "rtrals",
            Method::Rtrsvd => "rtrsvd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(m) = Method::ALL.iter().find(|m| m.name() == s) {
            return Ok(*m);
        }
        match s.as_str() {
            "rsvd" | "rtucker" | "rcpals" | "cpals" | "tucker" => {
                Err(format!("method `{s}` is reserved but not implemented"))
            }
            _ => Err(format!("unknown method `{s}`")),
        }
    }
}

/// Runs one method. Randomized methods need a projection.
pub fn run_method(
    x: &DenseTensor,
    method: Method,
    cfg: &SolverConfig,
    spec: Option<&ProjectionSpec>,
) -> Result<SolveReport> {
    let projection = || spec.ok_or_else(|| BenchError::Args(format!("{method} needs projection sizes")));
    let report = match method {
        Method::Trals => trals(x, cfg)?,
        Method::Trsvd => trsvd(x, cfg)?,
        Method::Trsgd => trsgd(x, cfg)?,
        Method::Rtrals => rtrals(x, cfg, projection()?)?,
        Method::Rtrsvd => rtrsvd(x, cfg, projection()?)?,
    };
    Ok(report)
}

/// One benchmark measurement, serialized in [`CSV_HEADER`] order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub method: String,
    pub dataset: String,
    /// Sketch sizes joined by `x`, or `-` for deterministic methods.
    #[serde(rename = "K")]
    pub k: String,
    /// Ranks of the returned factors joined by `x`.
    pub ranks: String,
    pub rse: f64,
    pub cr: f64,
    pub seconds: f64,
    pub seed: u64,
}

pub fn join_dims(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("x")
}

impl RunRecord {
    /// Record for factors evaluated against `reference`, which is the
    /// decomposed tensor itself except in denoising runs.
    pub fn new(
        method: Method,
        dataset: &str,
        spec: Option<&ProjectionSpec>,
        factors: &TRFactors,
        reference: &DenseTensor,
        seconds: f64,
        seed: u64,
    ) -> Result<Self> {
        let approx = factors.reconstruct_full();
        Ok(Self {
            method: method.to_string(),
            dataset: dataset.to_string(),
            k: match spec {
                Some(s) if method.is_randomized() => join_dims(&s.sketch_dims),
                _ => "-".into(),
            },
            ranks: join_dims(&factors.ranks()),
            rse: rse(reference, &approx)?,
            cr: compression_ratio(reference.shape(), factors)?,
            seconds,
            seed,
        })
    }
}

pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
