use crate::error::{Result, TrError};
use crate::tr::TRFactors;

/// Starting point of ALS.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AlsInit {
    /// TR-SVD truncated to the requested ranks.
    #[default]
    Svd,
    /// Seeded Gaussian cores.
    Random,
}

/// Hyperparameters shared by every solver.
///
/// `tolerance` is the target relative error for TR-SVD and the relative
/// RSE-change threshold for ALS. `ranks` is required by ALS and SGD and
/// ignored by TR-SVD.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub ranks: Option<Vec<usize>>,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    pub sgd_step: f64,
    pub sgd_batch: usize,
    pub als_init: AlsInit,
    /// ALS runs from this many starting points and keeps the best fit. The
    /// first uses `als_init`, the rest are Gaussian with derived seeds.
    pub als_starts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ranks: None,
            tolerance: 1e-8,
            max_sweeps: 50,
            seed: 0,
            sgd_step: 0.01,
            sgd_batch: 1,
            als_init: AlsInit::default(),
            als_starts: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_ranks(ranks: Vec<usize>) -> Self {
        Self {
            ranks: Some(ranks),
            ..Self::default()
        }
    }

    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance < 0.0 {
            return Err(TrError::InvalidConfig(format!(
                "tolerance must be finite and non-negative, got {}",
                self.tolerance
            )));
        }
        if self.max_sweeps == 0 {
            return Err(TrError::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        if self.als_starts == 0 {
            return Err(TrError::InvalidConfig("als_starts must be at least 1".into()));
        }
        if let Some(r) = &self.ranks {
            if r.contains(&0) {
                return Err(TrError::InvalidConfig(format!("ranks {r:?} must all be positive")));
            }
        }
        Ok(())
    }

    /// Ranks checked against a tensor of the given order.
    pub(crate) fn ranks_for(&self, order: usize) -> Result<&[usize]> {
        let ranks = self
            .ranks
            .as_deref()
            .ok_or_else(|| TrError::InvalidConfig("this solver needs a rank vector".into()))?;
        if ranks.len() != order {
            return Err(TrError::InvalidConfig(format!(
                "{} ranks given for an order-{order} tensor",
                ranks.len()
            )));
        }
        Ok(ranks)
    }
}

/// Outcome of a solver run.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub factors: TRFactors,
    /// Training RSE after each sweep; the last entry belongs to `factors`.
    pub rse_history: Vec<f64>,
    pub sweeps_run: usize,
    pub elapsed_seconds: f64,
}

impl SolveReport {
    pub fn final_rse(&self) -> f64 {
        *self.rse_history.last().expect("history is never empty")
    }
}
