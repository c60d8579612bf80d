use nalgebra::DMatrix;

use super::rng::keyed_uniform;
use super::ProbabilityTable;
use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

/// One observed entry with the probability it was drawn with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub i: usize,
    pub j: usize,
    pub p: f64,
    pub value: f64,
}

/// The observed set `Omega`, sorted in row-major order, with the draw-time
/// probability and observed value of every member.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    rows: usize,
    cols: usize,
    seed: u64,
    entries: Vec<Observation>,
}

impl SampleSet {
    /// Validates and sorts the observations. Duplicated indices, indices out
    /// of range, probabilities outside `(0, 1]` and non-finite values are
    /// rejected.
    pub fn from_observations(
        rows: usize,
        cols: usize,
        seed: u64,
        mut entries: Vec<Observation>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        for o in &entries {
            if o.i >= rows || o.j >= cols {
                return Err(Error::IndexOutOfRange {
                    row: o.i,
                    col: o.j,
                    rows,
                    cols,
                });
            }
            if o.p == 0.0 {
                return Err(Error::ZeroProbability { row: o.i, col: o.j });
            }
            if !(o.p > 0.0 && o.p <= 1.0) {
                return Err(Error::InvalidProbability {
                    row: o.i,
                    col: o.j,
                    value: o.p,
                });
            }
            if !o.value.is_finite() {
                return Err(Error::NonFinite {
                    row: o.i,
                    col: o.j,
                    value: o.value,
                });
            }
        }
        entries.sort_by_key(|o| (o.i, o.j));
        if let Some(w) = entries.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidParameter(format!(
                "duplicate index ({}, {})",
                w[0].i, w[0].j
            )));
        }
        Ok(Self {
            rows,
            cols,
            seed,
            entries,
        })
    }

    pub(crate) fn from_sorted_unchecked(
        rows: usize,
        cols: usize,
        seed: u64,
        entries: Vec<Observation>,
    ) -> Self {
        Self {
            rows,
            cols,
            seed,
            entries,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[Observation] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.entries
            .binary_search_by_key(&(i, j), |o| (o.i, o.j))
            .is_ok()
    }

    /// Row-major membership mask of length `m n`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.rows * self.cols];
        for o in &self.entries {
            mask[o.i * self.cols + o.j] = true;
        }
        mask
    }

    /// True when every index of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &SampleSet) -> bool {
        self.dims() == other.dims() && self.entries.iter().all(|o| other.contains(o.i, o.j))
    }

    /// Union of two sets over the same grid. On shared indices the entry of
    /// `self` is kept.
    pub fn union(&self, other: &SampleSet) -> Result<SampleSet> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    let (kx, ky) = ((x.i, x.j), (y.i, y.j));
                    if kx <= ky {
                        merged.push(**x);
                        a.next();
                        if kx == ky {
                            b.next();
                        }
                    } else {
                        merged.push(**y);
                        b.next();
                    }
                }
                (Some(x), None) => {
                    merged.push(**x);
                    a.next();
                }
                (None, Some(y)) => {
                    merged.push(**y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Ok(Self::from_sorted_unchecked(self.rows, self.cols, self.seed, merged))
    }
}

pub(crate) fn draw_round(
    m: &DenseMatrix,
    table: &ProbabilityTable,
    seed: u64,
    round: u64,
) -> Result<SampleSet> {
    m.check_dims(table.dims())?;
    let (rows, cols) = table.dims();
    let a = m.as_matrix();
    let mut entries = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let p = table.get(i, j);
            if p > 0.0 && keyed_uniform(seed, i as u64, j as u64, round) < p {
                entries.push(Observation {
                    i,
                    j,
                    p,
                    value: a[(i, j)],
                });
            }
        }
    }
    Ok(SampleSet::from_sorted_unchecked(rows, cols, seed, entries))
}

/// Includes `(i, j)` independently iff `u_ij < p_ij`, where `u_ij` is keyed
/// by `(seed, i, j)`. Two tables drawn with one seed therefore satisfy
/// `Omega_a ⊆ Omega_b` whenever `a <= b` entrywise.
pub fn draw_bernoulli(m: &DenseMatrix, table: &ProbabilityTable, seed: u64) -> Result<SampleSet> {
    draw_round(m, table, seed, 0)
}

/// `R_Omega(X) = sum over Omega of X_ij / p_ij e_i e_j^T`.
pub fn apply_r_omega(s: &SampleSet, x: &DenseMatrix) -> Result<DenseMatrix> {
    x.check_dims(s.dims())?;
    Ok(DenseMatrix::from_matrix_unchecked(r_omega_raw(s, x.as_matrix())?))
}

pub(crate) fn r_omega_raw(s: &SampleSet, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for o in s.entries() {
        if !(o.p > 0.0) {
            return Err(Error::ZeroProbability { row: o.i, col: o.j });
        }
        out[(o.i, o.j)] = x[(o.i, o.j)] / o.p;
    }
    Ok(out)
}

/// Unweighted restriction of `X` to `Omega`.
pub fn apply_p_omega(s: &SampleSet, x: &DenseMatrix) -> Result<DenseMatrix> {
    x.check_dims(s.dims())?;
    Ok(DenseMatrix::from_matrix_unchecked(p_omega_raw(s, x.as_matrix())))
}

pub(crate) fn p_omega_raw(s: &SampleSet, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for o in s.entries() {
        out[(o.i, o.j)] = x[(o.i, o.j)];
    }
    out
}

/// The observed values placed in an otherwise zero matrix.
pub fn observed_matrix(s: &SampleSet) -> DenseMatrix {
    let (m, n) = s.dims();
    let mut out = DMatrix::zeros(m, n);
    for o in s.entries() {
        out[(o.i, o.j)] = o.value;
    }
    DenseMatrix::from_matrix_unchecked(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn certain_and_impossible_inclusion() {
        let m = random(5, 4, 1);
        let all = draw_bernoulli(&m, &ProbabilityTable::constant(5, 4, 1.0).unwrap(), 3).unwrap();
        assert_eq!(all.len(), 20);
        let none = draw_bernoulli(&m, &ProbabilityTable::constant(5, 4, 0.0).unwrap(), 3).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn binomial_mean_of_sample_size() {
        let m = DenseMatrix::zeros(50, 40).unwrap();
        let t = ProbabilityTable::constant(50, 40, 0.3).unwrap();
        let seeds = 200;
        let total: usize = (0..seeds).map(|s| draw_bernoulli(&m, &t, s).unwrap().len()).sum();
        let mean = total as f64 / seeds as f64;
        // sd of a single draw is sqrt(2000 * 0.3 * 0.7); the mean of 200 draws
        // is within 3 of those of 600 by a wide margin.
        let sd = (2000.0_f64 * 0.3 * 0.7).sqrt();
        assert!((mean - 600.0).abs() <= 3.0 * sd, "{mean}");
        assert!((mean - 600.0).abs() <= 3.0 * sd / (seeds as f64).sqrt(), "{mean}");
    }

    #[test]
    fn r_omega_single_entry_weight() {
        let x = DenseMatrix::from_row_major(2, 2, vec![2.0, 1.0, 1.0, 1.0]).unwrap();
        let s = SampleSet::from_observations(
            2,
            2,
            0,
            vec![Observation {
                i: 0,
                j: 0,
                p: 0.5,
                value: 2.0,
            }],
        )
        .unwrap();
        let r = apply_r_omega(&s, &x).unwrap();
        assert_eq!(r.to_row_major(), vec![4.0, 0.0, 0.0, 0.0]);
        let p = apply_p_omega(&s, &x).unwrap();
        assert_eq!(p.to_row_major(), vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn full_observation_operators_are_identity() {
        let x = random(4, 3, 2);
        let s = draw_bernoulli(&x, &ProbabilityTable::constant(4, 3, 1.0).unwrap(), 0).unwrap();
        assert_eq!(apply_r_omega(&s, &x).unwrap(), x);
        assert_eq!(apply_p_omega(&s, &x).unwrap(), x);
        assert_eq!(observed_matrix(&s), x);
    }

    #[test]
    fn r_omega_is_unbiased() {
        let x = random(10, 10, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = ProbabilityTable::from_fn(10, 10, |_, _| rng.random_range(0.2..0.9)).unwrap();
        let draws = 2000;
        let mut acc = DMatrix::<f64>::zeros(10, 10);
        for s in 0..draws {
            let sample = draw_bernoulli(&x, &t, s).unwrap();
            acc += apply_r_omega(&sample, &x).unwrap().as_matrix();
        }
        acc /= draws as f64;
        let rel = (acc - x.as_matrix()).norm() / x.frobenius_norm();
        assert!(rel < 1e-1, "{rel}");
    }

    #[test]
    fn shared_seed_gives_nested_sets() {
        let x = random(12, 9, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let lo = ProbabilityTable::from_fn(12, 9, |_, _| rng.random_range(0.0..0.5)).unwrap();
        let hi = lo.map(|p| (p * 1.7).min(1.0)).unwrap();
        for seed in 0..20 {
            let a = draw_bernoulli(&x, &lo, seed).unwrap();
            let b = draw_bernoulli(&x, &hi, seed).unwrap();
            assert!(a.is_subset_of(&b));
        }
    }

    #[test]
    fn union_merges_and_deduplicates() {
        let x = random(6, 6, 7);
        let t = ProbabilityTable::constant(6, 6, 0.4).unwrap();
        let a = draw_bernoulli(&x, &t, 1).unwrap();
        let b = draw_bernoulli(&x, &t, 2).unwrap();
        let u = a.union(&b).unwrap();
        assert!(a.is_subset_of(&u) && b.is_subset_of(&u));
        let mask_a = a.mask();
        let mask_b = b.mask();
        let want = mask_a.iter().zip(&mask_b).filter(|(p, q)| **p || **q).count();
        assert_eq!(u.len(), want);
    }

    #[test]
    fn observation_validation() {
        let bad = |o: Observation| SampleSet::from_observations(2, 2, 0, vec![o]).is_err();
        assert!(bad(Observation { i: 2, j: 0, p: 0.5, value: 0.0 }));
        assert!(bad(Observation { i: 0, j: 0, p: 0.0, value: 0.0 }));
        assert!(bad(Observation { i: 0, j: 0, p: 0.5, value: f64::INFINITY }));
        let dup = Observation { i: 1, j: 1, p: 0.5, value: 0.0 };
        assert!(SampleSet::from_observations(2, 2, 0, vec![dup, dup]).is_err());
    }
}
