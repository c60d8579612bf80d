use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{backend, Subspace};
use crate::error::{Error, Result};
use crate::sampling::SampleSet;

/// Largest tangent-space dimension for which the operator is compressed to
/// an explicit `d x d` matrix.
const COMPRESSED_MAX_DIM: usize = 1500;
const POWER_MAX_ITER: usize = 200;
const POWER_REL_TOL: f64 = 1e-8;
const BLOCK_ROWS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorNormMethod {
    /// Pick `Compressed` when the tangent space is small enough, else `Power`.
    Auto,
    /// Exact: restrict the operator to an orthonormal basis of `T`.
    Compressed,
    /// Matrix-free power iteration on the self-adjoint operator.
    Power,
}

/// `||P_T R_Omega P_T - P_T||` as an operator on `m x n` matrices.
pub fn operator_norm_pt_romega_pt_minus_pt(sub: &Subspace, sample: &SampleSet) -> Result<f64> {
    operator_norm_with(sub, sample, OperatorNormMethod::Auto)
}

pub fn operator_norm_with(
    sub: &Subspace,
    sample: &SampleSet,
    method: OperatorNormMethod,
) -> Result<f64> {
    if sample.dims() != sub.dims() {
        return Err(Error::DimensionMismatch {
            expected: sub.dims(),
            actual: sample.dims(),
        });
    }
    let weighted = weighted_indices(sample)?;
    let method = match method {
        OperatorNormMethod::Auto if sub.dimension() <= COMPRESSED_MAX_DIM => {
            OperatorNormMethod::Compressed
        }
        OperatorNormMethod::Auto => OperatorNormMethod::Power,
        other => other,
    };
    match method {
        OperatorNormMethod::Compressed => compressed_norm(sub, &weighted),
        _ => Ok(power_norm(sub, &weighted)),
    }
}

fn weighted_indices(sample: &SampleSet) -> Result<Vec<(usize, usize, f64)>> {
    sample
        .entries()
        .iter()
        .map(|o| {
            if o.p > 0.0 {
                Ok((o.i, o.j, 1.0 / o.p))
            } else {
                Err(Error::ZeroProbability { row: o.i, col: o.j })
            }
        })
        .collect()
}

/// Orthonormal basis of the complement of `range(U)`.
pub(crate) fn orthogonal_complement(u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = u.nrows();
    let projector = DMatrix::<f64>::identity(m, m) - u * u.transpose();
    let (values, vectors) = backend::symmetric_eigen(&projector)?;
    let keep: Vec<usize> = (0..m).filter(|&k| values[k] > 0.5).collect();
    let mut out = DMatrix::zeros(m, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &vectors.column(src));
    }
    Ok(out)
}

/// With `Q` an orthonormal basis of `T` (as vectors of length `mn`), the
/// operator restricted to `T` is `Q^T R Q - I`, where
/// `Q^T R Q = sum_{(i,j) in Omega} w_ij q_ij q_ij^T` and `q_ij` is the
/// `(i,j)` row of `Q`. The basis is `{u_k e_b^T}` plus `{w_l v_k^T}` with
/// `w_l` spanning `range(U)^perp`.
fn compressed_norm(sub: &Subspace, weighted: &[(usize, usize, f64)]) -> Result<f64> {
    let f = sub.factorization();
    let (u, v) = (f.u(), f.v());
    let (m, n) = sub.dims();
    let r = sub.rank();
    let w = orthogonal_complement(u)?;
    let extra = w.ncols();
    let d = n * r + extra * r;
    debug_assert_eq!(extra, m - r);

    let mut gram = DMatrix::<f64>::zeros(d, d);
    for chunk in weighted.chunks(BLOCK_ROWS) {
        let mut block = DMatrix::<f64>::zeros(chunk.len(), d);
        for (row, &(i, j, weight)) in chunk.iter().enumerate() {
            let s = weight.sqrt();
            for k in 0..r {
                block[(row, k * n + j)] = s * u[(i, k)];
            }
            for l in 0..extra {
                let wil = s * w[(i, l)];
                if wil == 0.0 {
                    continue;
                }
                for k in 0..r {
                    block[(row, n * r + l * r + k)] = wil * v[(j, k)];
                }
            }
        }
        gram += block.tr_mul(&block);
    }
    for k in 0..d {
        gram[(k, k)] -= 1.0;
    }
    let values = backend::symmetric_eigenvalues(&gram)?;
    Ok(values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
}

fn apply_operator(sub: &Subspace, weighted: &[(usize, usize, f64)], x: &DMatrix<f64>) -> DMatrix<f64> {
    let px = sub.project_t_raw(x);
    let mut rx = DMatrix::<f64>::zeros(x.nrows(), x.ncols());
    for &(i, j, w) in weighted {
        rx[(i, j)] = w * px[(i, j)];
    }
    sub.project_t_raw(&rx) - px
}

fn power_norm(sub: &Subspace, weighted: &[(usize, usize, f64)]) -> f64 {
    let (m, n) = sub.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000_0000_0001);
    let start = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let mut x = sub.project_t_raw(&start);
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    x /= norm;
    let mut estimate = 0.0_f64;
    for _ in 0..POWER_MAX_ITER {
        let y = apply_operator(sub, weighted, &x);
        let next = y.norm();
        if next == 0.0 {
            return 0.0;
        }
        let converged = (next - estimate).abs() <= POWER_REL_TOL * next;
        estimate = next;
        x = y / next;
        if converged {
            break;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{truncated_svd, DenseMatrix};
    use crate::sampling::{draw_bernoulli, ProbabilityTable};

    fn instance(m: usize, n: usize, r: usize, seed: u64) -> (DenseMatrix, Subspace) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, r, |_, _| rng.random_range(-1.0..1.0))
            * DMatrix::from_fn(r, n, |_, _| rng.random_range(-1.0..1.0));
        let a = DenseMatrix::try_from(a).unwrap();
        let sub = Subspace::new(truncated_svd(&a, r).unwrap());
        (a, sub)
    }

    /// Dense `mn x mn` materialization, independent of the tangent basis.
    fn materialized_norm(sub: &Subspace, sample: &SampleSet) -> f64 {
        let (m, n) = sub.dims();
        let weighted = weighted_indices(sample).unwrap();
        let size = m * n;
        let mut op = DMatrix::<f64>::zeros(size, size);
        for col in 0..size {
            let mut e = DMatrix::<f64>::zeros(m, n);
            e[(col / n, col % n)] = 1.0;
            let y = apply_operator(sub, &weighted, &e);
            for row in 0..size {
                op[(row, col)] = y[(row / n, row % n)];
            }
        }
        crate::matcore::full_singular_values(&DenseMatrix::try_from(op).unwrap()).unwrap()[0]
    }

    #[test]
    fn full_observation_gives_zero() {
        let (a, sub) = instance(6, 5, 2, 1);
        let table = ProbabilityTable::constant(6, 5, 1.0).unwrap();
        let s = draw_bernoulli(&a, &table, 7).unwrap();
        let v = operator_norm_pt_romega_pt_minus_pt(&sub, &s).unwrap();
        assert!(v < 1e-10, "{v}");
        let p = operator_norm_with(&sub, &s, OperatorNormMethod::Power).unwrap();
        assert!(p < 1e-10, "{p}");
    }

    #[test]
    fn empty_sample_gives_one() {
        let (a, sub) = instance(6, 5, 2, 2);
        let table = ProbabilityTable::constant(6, 5, 0.0).unwrap();
        let s = draw_bernoulli(&a, &table, 7).unwrap();
        assert!(s.is_empty());
        let v = operator_norm_pt_romega_pt_minus_pt(&sub, &s).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn compressed_matches_materialized_operator() {
        for seed in 0..5 {
            let (a, sub) = instance(7, 6, 2, 10 + seed);
            let table = ProbabilityTable::constant(7, 6, 0.6).unwrap();
            let s = draw_bernoulli(&a, &table, seed).unwrap();
            let exact = materialized_norm(&sub, &s);
            let compressed = operator_norm_with(&sub, &s, OperatorNormMethod::Compressed).unwrap();
            assert!((exact - compressed).abs() < 1e-9, "{exact} vs {compressed}");
            let power = operator_norm_with(&sub, &s, OperatorNormMethod::Power).unwrap();
            assert!(power <= exact + 1e-9);
            assert!((exact - power).abs() < 1e-2 * exact.max(1.0), "{exact} vs {power}");
        }
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let (_, sub) = instance(9, 4, 3, 3);
        let u = sub.factorization().u();
        let w = orthogonal_complement(u).unwrap();
        assert_eq!(w.ncols(), 6);
        assert!((w.transpose() * &w - DMatrix::<f64>::identity(6, 6)).amax() < 1e-10);
        assert!((u.transpose() * &w).amax() < 1e-10);
    }
}
