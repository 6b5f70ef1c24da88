//! Dense N-way tensors and matrices.
//!
//! Storage is column-major throughout: the first index varies fastest, so the
//! element at multi-index `(i_0, .., i_{N-1})` lives at flat offset
//! `i_0 + I_0 * (i_1 + I_1 * (i_2 + ...))`. Modes are zero-based.
//!
//! Two unfoldings are provided and kept deliberately separate:
//!
//! * [`DenseTensor::unfold_classic`] puts mode `n` on the rows and orders the
//!   columns by `(i_0, .., i_{n-1}, i_{n+1}, .., i_{N-1})`, earlier indices
//!   fastest.
//! * [`DenseTensor::unfold_tr`] uses the cyclic column order
//!   `(i_{n+1}, .., i_{N-1}, i_0, .., i_{n-1})` that tensor-ring algebra needs.

use ndarray::{linalg::general_mat_mul, ArrayView2, ArrayViewMut2, ShapeBuilder};

use crate::error::{Result, TrError};

/// Dense real matrix stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TrError::InvalidShape(vec![rows, cols]));
        }
        if data.len() != rows * cols {
            return Err(TrError::DataLength {
                len: data.len(),
                expected: rows * cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i + n * i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Copies any ndarray matrix into column-major storage.
    pub fn from_array(a: ndarray::ArrayView2<'_, f64>) -> Result<Self> {
        let (rows, cols) = a.dim();
        let data = a.t().iter().copied().collect();
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + self.rows * j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + self.rows * j] = v;
    }

    /// Zero-copy ndarray view in Fortran order.
    pub fn view(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.rows, self.cols).f(), &self.data).expect("matrix storage matches its shape")
    }

    pub fn view_mut(&mut self) -> ArrayViewMut2<'_, f64> {
        ArrayViewMut2::from_shape((self.rows, self.cols).f(), &mut self.data).expect("matrix storage matches its shape")
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_array(self.view().t()).expect("transpose of a valid matrix")
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(TrError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols)?;
        general_mat_mul(1.0, &self.view(), &other.view(), 0.0, &mut out.view_mut());
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute deviation of `self^T self` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.view().t().dot(&self.view());
        let mut worst = 0.0f64;
        for ((i, j), v) in g.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
        worst
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self
                .view()
                .indexed_iter()
                .all(|((i, j), &v)| v == if i == j { 1.0 } else { 0.0 })
    }
}

/// Dense N-way array of `f64` with first-index-fastest storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(TrError::InvalidShape(shape.to_vec()));
    }
    Ok(shape.iter().product())
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected = check_shape(&shape)?;
        if data.len() != expected {
            return Err(TrError::DataLength {
                len: data.len(),
                expected,
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        })
    }

    pub fn filled(shape: &[usize], value: f64) -> Result<Self> {
        let mut t = Self::zeros(shape)?;
        t.data.fill(value);
        Ok(t)
    }

    /// Builds a tensor by evaluating `f` at every multi-index in storage order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_shape(shape)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, shape);
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat storage offset of a multi-index.
    pub fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.shape.len() || idx.iter().zip(&self.shape).any(|(i, d)| i >= d) {
            return Err(TrError::IndexOutOfRange {
                index: idx.to_vec(),
                shape: self.shape.clone(),
            });
        }
        let mut off = 0;
        for (i, d) in idx.iter().zip(&self.shape).rev() {
            off = off * d + i;
        }
        Ok(off)
    }

    /// Inverse of [`offset`](Self::offset).
    pub fn multi_index(&self, mut offset: usize) -> Vec<usize> {
        self.shape
            .iter()
            .map(|d| {
                let i = offset % d;
                offset /= d;
                i
            })
            .collect()
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[self.offset(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        let off = self.offset(idx)?;
        self.data[off] = value;
        Ok(())
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(TrError::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Reorders modes: mode `k` of the result is mode `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(TrError::DimensionMismatch(format!(
                "{perm:?} is not a permutation of {n} modes"
            )));
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let mut src_strides = vec![1usize; n];
        for d in 1..n {
            src_strides[d] = src_strides[d - 1] * self.shape[d - 1];
        }
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let strides: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();

        let inner = out_shape[0];
        let inner_stride = strides[0];
        let mut data = Vec::with_capacity(self.data.len());
        let mut outer = vec![0usize; n];
        let mut base = 0usize;
        loop {
            data.extend((0..inner).map(|i| self.data[base + i * inner_stride]));
            // odometer over modes 1..n, keeping the source base offset in step
            let mut k = 1;
            loop {
                if k == n {
                    return Self::new(out_shape, data);
                }
                outer[k] += 1;
                base += strides[k];
                if outer[k] < out_shape[k] {
                    break;
                }
                base -= strides[k] * out_shape[k];
                outer[k] = 0;
                k += 1;
            }
        }
    }

    /// Mode-`n` unfolding with columns ordered `(i_0, .., i_{n-1}, i_{n+1}, ..)`.
    pub fn unfold_classic(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let perm = classic_perm(self.order(), mode);
        let p = self.permute(&perm)?;
        let rows = self.shape[mode];
        Matrix::new(rows, p.len() / rows, p.data)
    }

    /// Mode-`n` unfolding with cyclic column order `(i_{n+1}, .., i_{N-1}, i_0, .., i_{n-1})`.
    pub fn unfold_tr(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let perm = cyclic_perm(self.order(), mode);
        let p = self.permute(&perm)?;
        let rows = self.shape[mode];
        Matrix::new(rows, p.len() / rows, p.data)
    }

    /// Inverse of [`unfold_classic`](Self::unfold_classic).
    pub fn fold_classic(m: &Matrix, mode: usize, shape: &[usize]) -> Result<Self> {
        fold_precheck(m, mode, shape)?;
        fold_with(m, shape, &classic_perm(shape.len(), mode))
    }

    /// Inverse of [`unfold_tr`](Self::unfold_tr).
    pub fn fold_tr(m: &Matrix, mode: usize, shape: &[usize]) -> Result<Self> {
        fold_precheck(m, mode, shape)?;
        fold_with(m, shape, &cyclic_perm(shape.len(), mode))
    }

    /// Mode-`n` product `self ×_n m`: replaces extent `I_n` by `m.rows()`.
    pub fn mode_n_product(&self, mode: usize, m: &Matrix) -> Result<Self> {
        self.check_mode(mode)?;
        let extent = self.shape[mode];
        if m.cols() != extent {
            return Err(TrError::DimensionMismatch(format!(
                "mode-{mode} product needs {extent} matrix columns, got {}",
                m.cols()
            )));
        }
        let left: usize = self.shape[..mode].iter().product();
        let right: usize = self.shape[mode + 1..].iter().product();
        let mut out_shape = self.shape.clone();
        out_shape[mode] = m.rows();
        let mut out = vec![0.0; left * m.rows() * right];

        if left == 1 {
            let x = ArrayView2::from_shape((extent, right).f(), &self.data).expect("slab view");
            let mut y = ArrayViewMut2::from_shape((m.rows(), right).f(), &mut out).expect("slab view");
            general_mat_mul(1.0, &m.view(), &x, 0.0, &mut y);
        } else {
            let in_slab = left * extent;
            let out_slab = left * m.rows();
            for (src, dst) in self.data.chunks_exact(in_slab).zip(out.chunks_exact_mut(out_slab)) {
                let x = ArrayView2::from_shape((left, extent).f(), src).expect("slab view");
                let mut y = ArrayViewMut2::from_shape((left, m.rows()).f(), dst).expect("slab view");
                general_mat_mul(1.0, &x, &m.view().t(), 0.0, &mut y);
            }
        }
        Self::new(out_shape, out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn inner_product(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(TrError::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Advances a column-major multi-index odometer by one position.
pub(crate) fn advance(idx: &mut [usize], shape: &[usize]) {
    for (i, &d) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < d {
            return;
        }
        *i = 0;
    }
}

fn classic_perm(order: usize, mode: usize) -> Vec<usize> {
    std::iter::once(mode).chain((0..order).filter(|&k| k != mode)).collect()
}

fn cyclic_perm(order: usize, mode: usize) -> Vec<usize> {
    (0..order).map(|k| (mode + k) % order).collect()
}

fn fold_precheck(m: &Matrix, mode: usize, shape: &[usize]) -> Result<()> {
    let total = check_shape(shape)?;
    if mode >= shape.len() {
        return Err(TrError::ModeOutOfRange {
            mode,
            order: shape.len(),
        });
    }
    if m.rows() != shape[mode] || m.rows() * m.cols() != total {
        return Err(TrError::DimensionMismatch(format!(
            "{}x{} matrix cannot fold into mode {mode} of {shape:?}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn fold_with(m: &Matrix, shape: &[usize], perm: &[usize]) -> Result<DenseTensor> {
    let permuted_shape: Vec<usize> = perm.iter().map(|&p| shape[p]).collect();
    let permuted = DenseTensor::new(permuted_shape, m.data().to_vec())?;
    let mut inverse = vec![0usize; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inverse[p] = k;
    }
    permuted.permute(&inverse)
}
