use nalgebra::DMatrix;

use super::{DenseMatrix, RankFactorization};
use crate::error::Result;

/// The tangent space `T` spanned by `u_k y^T` and `x v_k^T` for the singular
/// vectors of a factorization.
#[derive(Clone, Debug)]
pub struct Subspace {
    factorization: RankFactorization,
}

impl Subspace {
    pub fn new(factorization: RankFactorization) -> Self {
        Self { factorization }
    }

    pub fn factorization(&self) -> &RankFactorization {
        &self.factorization
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.factorization.rows(), self.factorization.cols())
    }

    pub fn rank(&self) -> usize {
        self.factorization.rank()
    }

    /// Dimension of `T`: `(m + n) r - r^2`.
    pub fn dimension(&self) -> usize {
        let (m, n) = self.dims();
        let r = self.rank();
        (m + n) * r - r * r
    }

    /// `P_T(X) = U U^T X + X V V^T - U U^T X V V^T`.
    pub fn project_t(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        x.check_dims(self.dims())?;
        Ok(DenseMatrix::from_matrix_unchecked(
            self.project_t_raw(x.as_matrix()),
        ))
    }

    /// `P_{T-perp}(X) = X - P_T(X)`.
    pub fn project_t_perp(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        x.check_dims(self.dims())?;
        let pt = self.project_t_raw(x.as_matrix());
        Ok(DenseMatrix::from_matrix_unchecked(x.as_matrix() - pt))
    }

    pub(crate) fn project_t_raw(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let u = self.factorization.u();
        let v = self.factorization.v();
        let ut_x = u.transpose() * x; // r x n
        let x_v = x * v; // m x r
        let ut_x_v = &ut_x * v; // r x r
        // U (U^T X) + (X V - U U^T X V) V^T
        let left = u * ut_x;
        let right = (x_v - u * ut_x_v) * v.transpose();
        left + right
    }

    /// `||P_T(e_i e_j^T)||_F^2` evaluated directly from the projector.
    pub fn unit_projection_norm_sq(&self, i: usize, j: usize) -> Result<f64> {
        let (m, n) = self.dims();
        let e = DenseMatrix::unit(m, n, i, j)?;
        Ok(self.project_t_raw(e.as_matrix()).norm_squared())
    }
}
