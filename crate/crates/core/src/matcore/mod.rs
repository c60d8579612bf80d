//! Dense linear-algebra substrate: the matrix value type, the SVD, tangent
//! space projectors and the norms used throughout the crate.

mod backend;
mod norms;
mod operator;
mod subspace;
mod svd;

pub use norms::{norms, NormBundle};
pub use operator::{operator_norm_pt_romega_pt_minus_pt, OperatorNormMethod};
pub use subspace::Subspace;
pub use svd::{full_singular_values, truncated_svd, RankFactorization, RANK_CUTOFF};
pub(crate) use backend::thin_svd as thin_svd_raw;
pub(crate) use norms::{mu_inf2_norm, mu_inf_norm};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A real `m x n` matrix with finite entries.
///
/// Storage is column-major (nalgebra), but all constructors and accessors that
/// deal with flat data use row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Self::try_from(DMatrix::from_row_slice(rows, cols, &data))
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: (i, n),
                    actual: (i, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(m, n, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_row_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix { rows: 0, cols: 0 });
        }
        Ok(Self {
            inner: DMatrix::identity(n, n),
        })
    }

    /// `e_i e_j^T` in an `m x n` matrix.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Result<Self> {
        if i >= rows || j >= cols {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows,
                cols,
            });
        }
        let mut inner = DMatrix::zeros(rows, cols);
        inner[(i, j)] = 1.0;
        Self::try_from(inner)
    }

    /// Builds a matrix entrywise; fails if any produced value is non-finite.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        Self::try_from(DMatrix::from_fn(rows, cols, f))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.inner.shape()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Borrow the underlying nalgebra matrix.
    #[inline]
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let (m, n) = self.dims();
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Trace inner product `<A, B> = Tr(A^T B)`.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.check_dims(other.dims())?;
        Ok(self.inner.dot(&other.inner))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other.dims())?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other.dims())?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::try_from(&self.inner * factor)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch {
                expected: (self.cols(), other.cols()),
                actual: other.dims(),
            });
        }
        Self::try_from(&self.inner * &other.inner)
    }

    pub(crate) fn check_dims(&self, other: (usize, usize)) -> Result<()> {
        if self.dims() != other {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other,
            });
        }
        Ok(())
    }

    /// Wraps a matrix produced by internal arithmetic on finite inputs.
    pub(crate) fn from_matrix_unchecked(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.iter().all(|v| v.is_finite()));
        Self { inner }
    }
}

impl TryFrom<DMatrix<f64>> for DenseMatrix {
    type Error = Error;

    fn try_from(inner: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        for j in 0..cols {
            for i in 0..rows {
                let value = inner[(i, j)];
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        row: i,
                        col: j,
                        value,
                    });
                }
            }
        }
        Ok(Self { inner })
    }
}

impl From<DenseMatrix> for DMatrix<f64> {
    fn from(m: DenseMatrix) -> Self {
        m.inner
    }
}
