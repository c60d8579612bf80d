use nalgebra::DMatrix;

use super::{backend, DenseMatrix};
use crate::error::{Error, Result};

/// Trailing singular values below `RANK_CUTOFF * sigma_1` are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Truncated SVD `U diag(sigma) V^T` of rank `rank`.
///
/// `U` and `V` have orthonormal columns, `sigma` is strictly positive and
/// nonincreasing. Column signs are fixed so that the largest-magnitude entry
/// of every column of `U` is nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct RankFactorization {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

impl RankFactorization {
    /// Assembles a factorization from explicit parts, checking the invariants
    /// (orthonormal columns to 1e-10, positive nonincreasing sigma).
    pub fn from_parts(u: DMatrix<f64>, sigma: Vec<f64>, v: DMatrix<f64>) -> Result<Self> {
        let r = sigma.len();
        if r == 0 {
            return Err(Error::ZeroRank);
        }
        if u.ncols() != r || v.ncols() != r {
            return Err(Error::DimensionMismatch {
                expected: (r, r),
                actual: (u.ncols(), v.ncols()),
            });
        }
        for w in sigma.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidParameter(
                    "singular values must be nonincreasing".into(),
                ));
            }
        }
        if sigma.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidParameter(
                "singular values must be finite and positive".into(),
            ));
        }
        for (name, basis) in [("U", &u), ("V", &v)] {
            let gram = basis.transpose() * basis;
            let dev = (gram - DMatrix::<f64>::identity(r, r)).amax();
            if !(dev <= 1e-10) {
                return Err(Error::InvalidParameter(format!(
                    "{name} columns are not orthonormal (max deviation {dev:e})"
                )));
            }
        }
        Ok(Self { u, sigma, v })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v.nrows()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (k, s) in self.sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        DenseMatrix::from_matrix_unchecked(us * self.v.transpose())
    }

    /// `U V^T`, the sign pattern of the factorized matrix.
    pub fn uv_t(&self) -> DenseMatrix {
        DenseMatrix::from_matrix_unchecked(&self.u * self.v.transpose())
    }
}

/// Full thin SVD sorted by decreasing singular value, with the sign convention
/// applied. Returns `(U, sigma, V)` with `min(m, n)` columns.
pub(crate) fn sorted_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (mut u, sigma, mut v) = backend::thin_svd(a)?;
    for k in 0..sigma.len() {
        let pivot = u.column(k).iter().copied().fold(0.0_f64, |best, x| {
            if x.abs() > best.abs() {
                x
            } else {
                best
            }
        });
        if pivot < 0.0 {
            u.column_mut(k).neg_mut();
            v.column_mut(k).neg_mut();
        }
    }
    Ok((u, sigma, v))
}

/// All `min(m, n)` singular values in decreasing order.
pub fn full_singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    backend::singular_values(a.as_matrix())
}

/// Top-`rank` singular triplets of `a`.
///
/// When `a` has numerical rank below `rank`, singular values under
/// `RANK_CUTOFF * sigma_1` are dropped and the returned factorization has
/// the reduced rank.
pub fn truncated_svd(a: &DenseMatrix, rank: usize) -> Result<RankFactorization> {
    let max = a.rows().min(a.cols());
    if rank == 0 || rank > max {
        return Err(Error::RankOutOfRange { rank, max });
    }
    let (u, sigma, v) = sorted_svd(a.as_matrix())?;
    let top = sigma[0];
    if !(top > 0.0) {
        return Err(Error::ZeroRank);
    }
    let keep = sigma
        .iter()
        .take(rank)
        .take_while(|s| **s > RANK_CUTOFF * top)
        .count();
    Ok(RankFactorization {
        u: u.columns(0, keep).into_owned(),
        sigma: sigma[..keep].to_vec(),
        v: v.columns(0, keep).into_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let f = truncated_svd(&DenseMatrix::identity(3).unwrap(), 3).unwrap();
        assert_eq!(f.rank(), 3);
        for s in f.sigma() {
            assert!((s - 1.0).abs() < 1e-14);
        }
        // U = V up to a common orthogonal factor; U V^T must be the identity.
        let uvt = f.uv_t();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((uvt.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_basis_outer_product() {
        let e11 = DenseMatrix::unit(4, 4, 0, 0).unwrap();
        let f = truncated_svd(&e11, 1).unwrap();
        assert_eq!(f.sigma(), &[1.0]);
        assert!((f.u()[(0, 0)].abs() - 1.0).abs() < 1e-14);
        assert!((f.v()[(0, 0)].abs() - 1.0).abs() < 1e-14);
        // Sign convention: largest entry of the U column is nonnegative.
        assert!(f.u()[(0, 0)] > 0.0);
    }

    #[test]
    fn exact_rank_two_reconstruction() {
        let left = random(6, 2, 1);
        let right = random(2, 5, 2);
        let product = &left * &right;
        let a = DenseMatrix::try_from(product.clone()).unwrap();
        let f = truncated_svd(&a, 2).unwrap();
        let err = (f.reconstruct().as_matrix() - product).norm();
        assert!(err <= 1e-8, "reconstruction error {err}");
        let gu = f.u().transpose() * f.u() - DMatrix::identity(2, 2);
        let gv = f.v().transpose() * f.v() - DMatrix::identity(2, 2);
        assert!(gu.amax() < 1e-10 && gv.amax() < 1e-10);
    }

    #[test]
    fn rank_is_reduced_below_numerical_rank() {
        let product = random(6, 2, 3) * random(2, 5, 4);
        let a = DenseMatrix::try_from(product).unwrap();
        let f = truncated_svd(&a, 4).unwrap();
        assert_eq!(f.rank(), 2);
    }

    #[test]
    fn wide_matrices_are_supported() {
        let a = DenseMatrix::try_from(random(4, 9, 5)).unwrap();
        let f = truncated_svd(&a, 4).unwrap();
        let err = (f.reconstruct().as_matrix() - a.as_matrix()).norm();
        assert!(err < 1e-12);
        assert_eq!(f.u().shape(), (4, 4));
        assert_eq!(f.v().shape(), (9, 4));
    }

    #[test]
    fn rejects_bad_rank_and_zero_matrix() {
        let a = DenseMatrix::identity(3).unwrap();
        assert!(matches!(
            truncated_svd(&a, 0),
            Err(Error::RankOutOfRange { .. })
        ));
        assert!(matches!(
            truncated_svd(&a, 4),
            Err(Error::RankOutOfRange { .. })
        ));
        let z = DenseMatrix::zeros(3, 3).unwrap();
        assert_eq!(truncated_svd(&z, 1), Err(Error::ZeroRank));
    }

    #[test]
    fn signs_are_reproducible() {
        let a = DenseMatrix::try_from(random(7, 5, 9)).unwrap();
        let f1 = truncated_svd(&a, 3).unwrap();
        let f2 = truncated_svd(&a.clone(), 3).unwrap();
        assert_eq!(f1, f2);
        for k in 0..3 {
            let col = f1.u().column(k);
            let pivot = col.iter().copied().fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(pivot >= 0.0);
        }
    }
}
