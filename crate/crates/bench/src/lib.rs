//! Benchmark harness for tensor ring decompositions: data readers, noise
//! injection, experiment drivers and CSV records. The `trbench` binary
//! exposes them on the command line.

pub mod data;
pub mod error;
pub mod harness;
pub mod noise;
pub mod record;
pub mod synth;

pub use error::{BenchError, Result};
pub use noise::{add_noise, NoiseSpec};
pub use record::{run_method, write_csv, Method, RunRecord, CSV_HEADER};
