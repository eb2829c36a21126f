//! Dense complex tensors and matrices.
//!
//! Everything is stored column-major: the first index varies fastest. Mode-k
//! unfoldings put mode k on the rows and enumerate the remaining modes in
//! ascending order on the columns, again with the lowest mode fastest. Under
//! this convention
//!
//! ```text
//! unfold(cp_compose(A, B, C), 0) == A · khatri_rao(C, B)ᵀ
//! ```
//!
//! which is the identity the ALS solver in [`crate::cp`] is built on.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::cp::CpFactors;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Column-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Complex64::ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::ShapeMismatch("columns have unequal lengths".into()));
        }
        let data = columns.iter().flatten().copied().collect();
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    /// Builds a matrix from row-major nested rows; handy in tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::ShapeMismatch("rows have unequal lengths".into()));
        }
        Ok(Self::from_fn(rows.len(), n_cols, |i, j| rows[i][j]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        (0..self.cols).map(move |j| self.column(j))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let w = other[(k, j)];
                if w == ZERO {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.column(k)) {
                    *d += a * w;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![ZERO; self.rows];
        for (k, &w) in x.iter().enumerate() {
            for (d, a) in out.iter_mut().zip(self.column(k)) {
                *d += a * w;
            }
        }
        Ok(out)
    }

    /// Gram matrix `selfᴴ · self`.
    pub fn gram(&self) -> ComplexMatrix {
        let k = self.cols;
        let mut g = ComplexMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = dot_conj(self.column(i), self.column(j));
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.rows + i]
    }
}

/// Column-major dense complex tensor of arbitrary order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "extents must be positive, got {dims:?}"
            )));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "dims {dims:?} need {n} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        assert!(
            !dims.is_empty() && !dims.contains(&0),
            "extents must be positive"
        );
        Self {
            dims: dims.to_vec(),
            data: vec![ZERO; dims.iter().product()],
        }
    }

    /// Fills a tensor by calling `f` with each multi-index in storage order.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let mut t = Self::zeros(dims);
        let mut idx = vec![0usize; dims.len()];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            for (i, &d) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < d {
                    break;
                }
                *i = 0;
            }
        }
        t
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &d) in idx.iter().zip(&self.dims) {
            debug_assert!(i < d);
            lin += i * stride;
            stride *= d;
        }
        lin
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.linear_index(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: Complex64) {
        let lin = self.linear_index(idx);
        self.data[lin] = v;
    }

    /// Shorthand for third-order access.
    #[inline]
    pub fn at3(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[i + self.dims[0] * (j + self.dims[1] * k)]
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Column-major vectorization.
    pub fn vectorize(&self) -> Vec<Complex64> {
        self.data.clone()
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Inner product `⟨self, other⟩ = Σ self · conj(other)`.
    pub fn inner(&self, other: &ComplexTensor) -> Result<Complex64> {
        self.check_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    pub fn sub(&self, other: &ComplexTensor) -> Result<ComplexTensor> {
        self.check_same_dims(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &ComplexTensor) -> Result<ComplexTensor> {
        self.check_same_dims(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> ComplexTensor {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    fn check_same_dims(&self, other: &ComplexTensor) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    /// Mode-`mode` unfolding.
    pub fn unfold(&self, mode: usize) -> Result<ComplexMatrix> {
        let order = self.order();
        if mode >= order {
            return Err(Error::ModeOutOfRange { mode, order });
        }
        let rows = self.dims[mode];
        let cols = self.data.len() / rows;
        let inner: usize = self.dims[..mode].iter().product();
        let mut out = ComplexMatrix::zeros(rows, cols);
        // Source layout is (inner, mode, outer); target column = inner + inner_len * outer.
        for (lin, &v) in self.data.iter().enumerate() {
            let lo = lin % inner;
            let rest = lin / inner;
            let i = rest % rows;
            let hi = rest / rows;
            out[(i, lo + inner * hi)] = v;
        }
        Ok(out)
    }

    /// Inverse of [`ComplexTensor::unfold`].
    pub fn fold(m: &ComplexMatrix, mode: usize, dims: &[usize]) -> Result<ComplexTensor> {
        if mode >= dims.len() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: dims.len(),
            });
        }
        let total: usize = dims.iter().product();
        if m.rows() != dims[mode] || m.rows() * m.cols() != total {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix cannot fold into {dims:?} along mode {mode}",
                m.rows(),
                m.cols()
            )));
        }
        let rows = dims[mode];
        let inner: usize = dims[..mode].iter().product();
        let mut data = vec![ZERO; total];
        for (lin, slot) in data.iter_mut().enumerate() {
            let lo = lin % inner;
            let rest = lin / inner;
            let i = rest % rows;
            let hi = rest / rows;
            *slot = m[(i, lo + inner * hi)];
        }
        ComplexTensor::new(dims.to_vec(), data)
    }

    /// Reorders modes so that output mode `k` is input mode `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<ComplexTensor> {
        let order = self.order();
        let mut seen = vec![false; order];
        if perm.len() != order
            || perm
                .iter()
                .any(|&p| p >= order || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::ShapeMismatch(format!(
                "{perm:?} is not a permutation of 0..{order}"
            )));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut src = vec![0usize; order];
        Ok(ComplexTensor::from_fn(&new_dims, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src)
        }))
    }
}

/// Column-wise Kronecker product. Column `k` is `a[:,k] ⊗ b[:,k]`, with `b`'s
/// row index varying fastest.
pub fn khatri_rao(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols() != b.cols() {
        return Err(Error::RankMismatch(vec![a.cols(), b.cols()]));
    }
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols());
    for k in 0..a.cols() {
        let dst = out.column_mut(k);
        for (i, &ai) in a.column(k).iter().enumerate() {
            for (j, &bj) in b.column(k).iter().enumerate() {
                dst[i * b.rows() + j] = ai * bj;
            }
        }
    }
    Ok(out)
}

/// Outer product of the given vectors.
pub fn rank1_compose(factors: &[&[Complex64]]) -> Result<ComplexTensor> {
    if factors.is_empty() || factors.iter().any(|f| f.is_empty()) {
        return Err(Error::ShapeMismatch(
            "rank-1 composition needs nonempty factors".into(),
        ));
    }
    let mut data = vec![Complex64::ONE];
    for f in factors {
        let mut next = Vec::with_capacity(data.len() * f.len());
        for &x in f.iter() {
            next.extend(data.iter().map(|&d| d * x));
        }
        data = next;
    }
    let dims = factors.iter().map(|f| f.len()).collect();
    ComplexTensor::new(dims, data)
}

/// Sum of the `K` rank-1 terms encoded by `f`.
pub fn cp_compose(f: &CpFactors) -> Result<ComplexTensor> {
    let (a, b, c) = (&f.a1, &f.a2, &f.a3);
    if a.cols() != b.cols() || b.cols() != c.cols() {
        return Err(Error::RankMismatch(vec![a.cols(), b.cols(), c.cols()]));
    }
    let (ni, nj, nk) = (a.rows(), b.rows(), c.rows());
    let mut data = vec![ZERO; ni * nj * nk];
    for r in 0..a.cols() {
        let (ar, br, cr) = (a.column(r), b.column(r), c.column(r));
        for k in 0..nk {
            for j in 0..nj {
                let w = br[j] * cr[k];
                let base = ni * (j + nj * k);
                for (d, &x) in data[base..base + ni].iter_mut().zip(ar) {
                    *d += x * w;
                }
            }
        }
    }
    ComplexTensor::new(vec![ni, nj, nk], data)
}

#[inline]
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ conj(a_i) b_i`.
#[inline]
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
