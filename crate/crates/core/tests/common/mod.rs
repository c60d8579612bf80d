#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relaxmc::matcore::DenseMatrix;

/// A random rank-`r` product `A B` together with orthonormal bases of its
/// column and row spaces taken from QR of the factors, not from an SVD.
pub struct Instance {
    pub matrix: DenseMatrix,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

pub fn instance(m: usize, n: usize, r: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(m, r, |_, _| rng.random_range(-1.0..1.0));
    let b = DMatrix::from_fn(r, n, |_, _| rng.random_range(-1.0..1.0));
    let u = a.clone().qr().q();
    let v = b.transpose().qr().q();
    Instance {
        matrix: DenseMatrix::try_from(&a * &b).unwrap(),
        u,
        v,
    }
}

pub fn random_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::try_from(DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

/// `X - (I - U U^T) X (I - V V^T)`.
pub fn oracle_project_t(u: &DMatrix<f64>, v: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let pu = DMatrix::identity(u.nrows(), u.nrows()) - u * u.transpose();
    let pv = DMatrix::identity(v.nrows(), v.nrows()) - v * v.transpose();
    x - pu * x * pv
}

/// `||U^T e_i||^2 + ||V^T e_j||^2 - ||U^T e_i||^2 ||V^T e_j||^2`.
pub fn oracle_relaxed(u: &DMatrix<f64>, v: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let x = u.row(i).norm_squared();
    let y = v.row(j).norm_squared();
    x + y - x * y
}
