//! Full-row sampling and fixed-size draws without replacement.

use nalgebra::DMatrix;

use super::rng::{keyed_uniform, ROW_KEY};
use super::{Observation, SampleSet};
use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

/// Rows picked independently with probability `p`, and `S_Gamma(M)`: the
/// matrix with every row outside `Gamma` zeroed.
#[derive(Clone, Debug, PartialEq)]
pub struct RowSample {
    pub rows: Vec<usize>,
    pub submatrix: DenseMatrix,
    pub p: f64,
}

pub fn sample_full_rows(m: &DenseMatrix, p: f64, seed: u64) -> Result<RowSample> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "row probability must be in [0, 1], got {p}"
        )));
    }
    let rows: Vec<usize> = (0..m.rows())
        .filter(|&i| p > 0.0 && keyed_uniform(seed, i as u64, ROW_KEY, 0) < p)
        .collect();
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for &i in &rows {
        out.set_row(i, &m.as_matrix().row(i));
    }
    Ok(RowSample {
        rows,
        submatrix: DenseMatrix::from_matrix_unchecked(out),
        p,
    })
}

/// Picks exactly `count` of the unmasked entries, the chance of each entry
/// proportional to its weight (Efraimidis-Spirakis keys `ln(u) / w`).
/// Entries with zero weight are never picked; with fewer positive-weight
/// candidates than `count` an error is returned.
///
/// The stored probability of a picked entry is `min(1, count * w / W)` with
/// `W` the total candidate weight, the first-order inclusion rate.
pub fn weighted_without_replacement(
    m: &DenseMatrix,
    weights: &[f64],
    excluded: &[bool],
    count: usize,
    seed: u64,
    round: u64,
) -> Result<SampleSet> {
    let (rows, cols) = m.dims();
    let size = rows * cols;
    if weights.len() != size || excluded.len() != size {
        return Err(Error::EntryCount {
            rows,
            cols,
            expected: size,
            actual: weights.len().min(excluded.len()),
        });
    }
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    let mut total = 0.0;
    for k in 0..size {
        let w = weights[k];
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight {w} at index {k} must be finite and nonnegative"
            )));
        }
        if excluded[k] || w == 0.0 {
            continue;
        }
        total += w;
        let u = keyed_uniform(seed, (k / cols) as u64, (k % cols) as u64, round);
        // u in [0, 1): shift away from 0 so ln stays finite.
        let key = (1.0 - u).ln() / w;
        candidates.push((key, k));
    }
    if candidates.len() < count {
        return Err(Error::InvalidParameter(format!(
            "only {} candidates with positive weight for {count} draws",
            candidates.len()
        )));
    }
    let by_key = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if count < candidates.len() {
        candidates.select_nth_unstable_by(count, by_key);
        candidates.truncate(count);
    }
    let mut picked: Vec<usize> = candidates.into_iter().map(|(_, k)| k).collect();
    picked.sort_unstable();
    let a = m.as_matrix();
    let entries = picked
        .into_iter()
        .map(|k| {
            let (i, j) = (k / cols, k % cols);
            Observation {
                i,
                j,
                p: (count as f64 * weights[k] / total).clamp(f64::MIN_POSITIVE, 1.0),
                value: a[(i, j)],
            }
        })
        .collect();
    Ok(SampleSet::from_sorted_unchecked(rows, cols, seed, entries))
}

/// Exactly `count` entries, uniformly without replacement.
pub fn uniform_without_replacement(
    m: &DenseMatrix,
    count: usize,
    seed: u64,
    round: u64,
) -> Result<SampleSet> {
    let size = m.rows() * m.cols();
    if count > size {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {count} entries from {size}"
        )));
    }
    weighted_without_replacement(m, &vec![1.0; size], &vec![false; size], count, seed, round)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_sampling_extremes() {
        let m = DenseMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 + 1.0).unwrap();
        let all = sample_full_rows(&m, 1.0, 2).unwrap();
        assert_eq!(all.rows, vec![0, 1, 2, 3]);
        assert_eq!(all.submatrix, m);
        let none = sample_full_rows(&m, 0.0, 2).unwrap();
        assert!(none.rows.is_empty());
        assert_eq!(none.submatrix.frobenius_norm(), 0.0);
        assert!(sample_full_rows(&m, 1.5, 2).is_err());
    }

    #[test]
    fn uniform_draw_has_exact_size() {
        let m = DenseMatrix::zeros(7, 6).unwrap();
        for count in [0, 1, 20, 42] {
            let s = uniform_without_replacement(&m, count, 3, 0).unwrap();
            assert_eq!(s.len(), count);
        }
        assert!(uniform_without_replacement(&m, 43, 3, 0).is_err());
    }

    #[test]
    fn weighted_draw_respects_exclusion_and_zeros() {
        let m = DenseMatrix::zeros(3, 3).unwrap();
        let mut w = vec![1.0; 9];
        w[4] = 0.0;
        let mut ex = vec![false; 9];
        ex[0] = true;
        let s = weighted_without_replacement(&m, &w, &ex, 7, 1, 1).unwrap();
        assert_eq!(s.len(), 7);
        assert!(!s.contains(0, 0) && !s.contains(1, 1));
        assert!(weighted_without_replacement(&m, &w, &ex, 8, 1, 1).is_err());
    }

    #[test]
    fn heavier_entries_are_picked_more_often() {
        let m = DenseMatrix::zeros(1, 4).unwrap();
        let w = [1.0, 1.0, 1.0, 6.0];
        let mut hits = [0usize; 4];
        let seeds = 4000;
        for seed in 0..seeds {
            let s = weighted_without_replacement(&m, &w, &[false; 4], 1, seed, 0).unwrap();
            hits[s.entries()[0].j] += 1;
        }
        // Single draw: P(pick 3) = 6/9.
        let rate = hits[3] as f64 / seeds as f64;
        assert!((rate - 2.0 / 3.0).abs() < 0.03, "{rate}");
    }
}
