//! Dense decompositions, computed by faer on copies of nalgebra matrices.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD with singular values in nonincreasing order: `(U, sigma, V)`
/// with `min(m, n)` columns each.
pub(crate) fn thin_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = to_faer(a).thin_svd().map_err(|_| Error::SvdNoConvergence)?;
    let k = a.nrows().min(a.ncols());
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let mut sigma: Vec<f64> = (0..k).map(|t| s[t]).collect();
    let mut order: Vec<usize> = (0..k).collect();
    if sigma.windows(2).any(|w| w[1] > w[0]) {
        order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
        sigma = order.iter().map(|&t| s[t]).collect();
    }
    let u = DMatrix::from_fn(a.nrows(), k, |i, t| u[(i, order[t])]);
    let v = DMatrix::from_fn(a.ncols(), k, |j, t| v[(j, order[t])]);
    Ok((u, sigma, v))
}

/// Singular values in nonincreasing order.
pub(crate) fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut values = to_faer(a)
        .singular_values()
        .map_err(|_| Error::SvdNoConvergence)?;
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Eigen-decomposition of a symmetric matrix: `(values, vectors)`.
pub(crate) fn symmetric_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let evd = to_faer(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNoConvergence)?;
    let n = a.nrows();
    let (s, u) = (evd.S(), evd.U());
    let values = (0..n).map(|k| s[k]).collect();
    Ok((values, DMatrix::from_fn(n, n, |i, k| u[(i, k)])))
}

pub(crate) fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    to_faer(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenNoConvergence)
}
