//! Tensor ring decomposition.
//!
//! * [`tensor`]: dense N-way tensors, both mode unfoldings, mode products.
//! * [`tr`]: the tensor-ring factor container and its reconstructions.
//! * [`solvers`]: TR-ALS, TR-SVD and a TR-SGD baseline.
//! * [`sketch`]: per-mode Gaussian sketching and the randomized solvers
//!   built on it.
//! * [`io`]: the `DTEN` tensor and `TRNG` factor file formats.

pub mod error;
pub mod io;
pub mod rng;
pub mod sketch;
pub mod solvers;
pub mod tensor;
pub mod tr;

pub use error::{Result, TrError};
pub use sketch::{back_project, rtrals, rtrd, rtrsvd, sketch, ProjectionSpec, SketchResult, SmallSolver};
pub use solvers::{rse, trals, trsgd, trsvd, AlsInit, SolveReport, SolverConfig};
pub use tensor::{DenseTensor, Matrix};
pub use tr::{compression_ratio, TRFactors};
