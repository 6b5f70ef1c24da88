//! Tensor-ring factor container and reconstruction.
//!
//! Core `n` has shape `(R_n, I_n, R_{n+1})` with the ring closed by
//! `R_N = R_0`. Entry `X(i_0, .., i_{N-1})` is the trace of the ordered
//! product of the lateral slices `G_n(i_n)`.

use ndarray::linalg::general_mat_mul;

use crate::error::{Result, TrError};
use crate::rng::{gaussian_tensor, TrRng};
use crate::tensor::{DenseTensor, Matrix};

/// Ordered ring of third-order cores.
#[derive(Clone, Debug, PartialEq)]
pub struct TRFactors {
    cores: Vec<DenseTensor>,
}

impl TRFactors {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        if cores.is_empty() {
            return Err(TrError::InvalidConfig("a tensor ring needs at least one core".into()));
        }
        for (n, core) in cores.iter().enumerate() {
            if core.order() != 3 {
                return Err(TrError::DimensionMismatch(format!(
                    "core {n} has order {}, expected 3",
                    core.order()
                )));
            }
            let next = &cores[(n + 1) % cores.len()];
            if core.shape()[2] != next.shape()[0] {
                return Err(TrError::DimensionMismatch(format!(
                    "core {n} trailing rank {} does not match core {} leading rank {}",
                    core.shape()[2],
                    (n + 1) % cores.len(),
                    next.shape()[0]
                )));
            }
        }
        Ok(Self { cores })
    }

    /// Cores with i.i.d. standard normal entries.
    pub fn random(dims: &[usize], ranks: &[usize], rng: &mut TrRng) -> Result<Self> {
        Self::from_shapes(dims, ranks, |shape| gaussian_tensor(shape, rng))
    }

    /// Every core entry set to `value`.
    pub fn constant(dims: &[usize], ranks: &[usize], value: f64) -> Result<Self> {
        Self::from_shapes(dims, ranks, |shape| DenseTensor::filled(shape, value))
    }

    pub(crate) fn from_shapes(
        dims: &[usize],
        ranks: &[usize],
        mut make: impl FnMut(&[usize]) -> Result<DenseTensor>,
    ) -> Result<Self> {
        if dims.len() != ranks.len() || dims.is_empty() {
            return Err(TrError::InvalidConfig(format!(
                "{} ranks given for an order-{} ring",
                ranks.len(),
                dims.len()
            )));
        }
        if ranks.contains(&0) {
            return Err(TrError::InvalidConfig(format!("ranks {ranks:?} must all be positive")));
        }
        let n = dims.len();
        let cores = (0..n)
            .map(|k| make(&[ranks[k], dims[k], ranks[(k + 1) % n]]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn core(&self, n: usize) -> &DenseTensor {
        &self.cores[n]
    }

    pub fn into_cores(self) -> Vec<DenseTensor> {
        self.cores
    }

    /// `(R_0, .., R_{N-1})`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[0]).collect()
    }

    /// Physical extents `(I_0, .., I_{N-1})`.
    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// Lateral slice `G_n(i)` as an `R_n × R_{n+1}` matrix.
    pub fn slice(&self, n: usize, i: usize) -> Matrix {
        core_slice(&self.cores[n], i)
    }

    /// Trace of the ordered slice product at one multi-index.
    pub fn reconstruct_elementwise(&self, idx: &[usize]) -> Result<f64> {
        let dims = self.dims();
        if idx.len() != dims.len() || idx.iter().zip(&dims).any(|(i, d)| i >= d) {
            return Err(TrError::IndexOutOfRange {
                index: idx.to_vec(),
                shape: dims,
            });
        }
        let mut acc = self.slice(0, idx[0]);
        for (n, &i) in idx.iter().enumerate().skip(1) {
            acc = acc.matmul(&self.slice(n, i))?;
        }
        Ok((0..acc.rows()).map(|a| acc.get(a, a)).sum())
    }

    /// Full tensor through the mode-0 subchain product.
    pub fn reconstruct_full(&self) -> DenseTensor {
        self.reconstruct_via_mode(0)
            .expect("mode 0 exists for every valid ring")
    }

    /// Full tensor via `X_<n> = G_n,(2) · (G_≠n,<2>)^T`, folded back.
    pub fn reconstruct_via_mode(&self, n: usize) -> Result<DenseTensor> {
        let dims = self.dims();
        if n >= self.order() {
            return Err(TrError::ModeOutOfRange {
                mode: n,
                order: self.order(),
            });
        }
        if self.order() == 1 {
            let core = &self.cores[0];
            let data = (0..dims[0])
                .map(|i| {
                    let s = core_slice(core, i);
                    (0..s.rows()).map(|a| s.get(a, a)).sum()
                })
                .collect();
            return DenseTensor::new(dims, data);
        }
        let core_mat = self.cores[n].unfold_classic(1)?;
        let chain = self.subchain(n)?.unfold_tr(1)?;
        let mut unfolded = Matrix::zeros(core_mat.rows(), chain.rows())?;
        general_mat_mul(1.0, &core_mat.view(), &chain.view().t(), 0.0, &mut unfolded.view_mut());
        DenseTensor::fold_tr(&unfolded, n, &dims)
    }

    /// Merges every core except `n`, in ring order starting at `n + 1`,
    /// into one tensor of shape `(R_{n+1}, ∏_{k≠n} I_k, R_n)`. The middle
    /// index runs over `(i_{n+1}, .., i_{n-1})` with `i_{n+1}` fastest.
    pub fn subchain(&self, n: usize) -> Result<DenseTensor> {
        let order = self.order();
        if order < 2 {
            return Err(TrError::InvalidConfig("a subchain needs at least two cores".into()));
        }
        if n >= order {
            return Err(TrError::ModeOutOfRange { mode: n, order });
        }
        let chain: Vec<&DenseTensor> = (1..order).map(|k| &self.cores[(n + k) % order]).collect();
        merge_chain(&chain)
    }

    pub fn num_params(&self) -> usize {
        self.cores.iter().map(|c| c.len()).sum()
    }

    /// Ring with core `k` moved to the front.
    pub fn rotate(&self, k: usize) -> TRFactors {
        let n = self.order();
        let cores = (0..n).map(|j| self.cores[(j + k) % n].clone()).collect();
        TRFactors { cores }
    }
}

/// `∏ I_n / Σ_n R_n I_n R_{n+1}`.
pub fn compression_ratio(shape: &[usize], factors: &TRFactors) -> Result<f64> {
    if shape != factors.dims().as_slice() {
        return Err(TrError::ShapeMismatch {
            left: shape.to_vec(),
            right: factors.dims(),
        });
    }
    let entries: f64 = shape.iter().map(|&d| d as f64).product();
    Ok(entries / factors.num_params() as f64)
}

pub(crate) fn core_slice(core: &DenseTensor, i: usize) -> Matrix {
    let s = core.shape();
    let (r0, extent, r1) = (s[0], s[1], s[2]);
    let data = core.data();
    Matrix::from_fn(r0, r1, |a, b| data[a + r0 * (i + extent * b)]).expect("non-empty slice")
}

/// Contracts a non-empty chain of cores over their shared ranks.
pub(crate) fn merge_chain(chain: &[&DenseTensor]) -> Result<DenseTensor> {
    let mut acc = chain[0].clone();
    for core in &chain[1..] {
        let (ra, j, rb) = (acc.shape()[0], acc.shape()[1], acc.shape()[2]);
        let (rb2, i, rc) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        if rb != rb2 {
            return Err(TrError::DimensionMismatch(format!(
                "chain rank {rb} does not meet core rank {rb2}"
            )));
        }
        let left = Matrix::new(ra * j, rb, acc.into_data())?;
        let right = Matrix::new(rb, i * rc, core.data().to_vec())?;
        let merged = left.matmul(&right)?;
        acc = DenseTensor::new(vec![ra, j * i, rc], merged.into_data())?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn rank_one_ones() {
        let f = TRFactors::constant(&[3, 2, 4], &[1, 1, 1], 1.0).unwrap();
        assert_eq!(f.reconstruct_elementwise(&[2, 1, 3]).unwrap(), 1.0);
        let full = f.reconstruct_full();
        assert!(full.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rank_two_ones_give_eight() {
        let f = TRFactors::constant(&[2, 3, 2], &[2, 2, 2], 1.0).unwrap();
        assert_eq!(f.reconstruct_elementwise(&[1, 2, 0]).unwrap(), 8.0);
        assert!(f.reconstruct_full().data().iter().all(|&v| v == 8.0));
    }

    #[test]
    fn elementwise_index_checked() {
        let f = TRFactors::constant(&[2, 2], &[1, 1], 1.0).unwrap();
        assert!(f.reconstruct_elementwise(&[2, 0]).is_err());
        assert!(f.reconstruct_elementwise(&[0]).is_err());
    }

    #[test]
    fn two_core_subchain_is_permuted_core() {
        let f = TRFactors::random(&[3, 4], &[2, 5], &mut rng_from_seed(3)).unwrap();
        let s = f.subchain(0).unwrap();
        // core 1 has shape (R_1, I_1, R_0) = (5, 4, 2), which already is the
        // (R_{n+1}, I, R_n) layout
        assert_eq!(s.shape(), &[5, 4, 2]);
        assert_eq!(&s, f.core(1));
    }

    #[test]
    fn subchain_of_ones() {
        let f = TRFactors::constant(&[2, 2, 2], &[2, 2, 2], 1.0).unwrap();
        for n in 0..3 {
            let s = f.subchain(n).unwrap();
            assert_eq!(s.shape(), &[2, 4, 2]);
            assert!(s.data().iter().all(|&v| v == 2.0));
        }
    }

    #[test]
    fn subchain_needs_two_cores() {
        let f = TRFactors::constant(&[3], &[2], 1.0).unwrap();
        assert!(f.subchain(0).is_err());
    }

    #[test]
    fn single_core_ring_is_slice_trace() {
        let f = TRFactors::random(&[4], &[3], &mut rng_from_seed(1)).unwrap();
        let full = f.reconstruct_full();
        for i in 0..4 {
            let e = f.reconstruct_elementwise(&[i]).unwrap();
            assert!((full.data()[i] - e).abs() < 1e-14);
        }
    }

    #[test]
    fn parameter_count_and_ratio() {
        let f = TRFactors::constant(&[10, 10, 10], &[2, 2, 2], 1.0).unwrap();
        assert_eq!(f.num_params(), 120);
        let cr = compression_ratio(&[10, 10, 10], &f).unwrap();
        assert!((cr - 1000.0 / 120.0).abs() < 1e-12);

        let g = TRFactors::constant(&[7, 7, 7], &[1, 1, 1], 1.0).unwrap();
        let cr = compression_ratio(&[7, 7, 7], &g).unwrap();
        assert!((cr - 49.0 / 3.0).abs() < 1e-12);
        assert!(compression_ratio(&[7, 7], &g).is_err());
    }

    #[test]
    fn mismatched_ranks_rejected() {
        let a = DenseTensor::zeros(&[2, 3, 4]).unwrap();
        let b = DenseTensor::zeros(&[3, 3, 2]).unwrap();
        assert!(TRFactors::new(vec![a.clone(), b]).is_err());
        let c = DenseTensor::zeros(&[4, 3, 2]).unwrap();
        assert!(TRFactors::new(vec![a, c]).is_ok());
        assert!(TRFactors::constant(&[2, 2], &[1, 0], 1.0).is_err());
    }
}
