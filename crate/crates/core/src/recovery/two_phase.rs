//! Two-phase sampling without prior knowledge of the scores: a uniform
//! first phase estimates them, a weighted second phase spends the rest of
//! the budget.

use crate::error::{Error, Result};
use crate::leverage::relax;
use crate::matcore::{truncated_svd, DenseMatrix};
use crate::sampling::{
    observed_matrix, uniform_without_replacement, weighted_without_replacement, SampleSet,
};

const PHASE_ONE_ROUND: u64 = 1;
const PHASE_TWO_ROUND: u64 = 2;
const FILL_ROUND: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhaseSample {
    pub sample: SampleSet,
    pub phase_one: usize,
    pub phase_two: usize,
    /// Estimated row and column masses `mu_i r / m`, `nu_j r / n`.
    pub row_masses: Vec<f64>,
    pub col_masses: Vec<f64>,
}

/// Draws `floor(beta s)` entries uniformly, estimates the masses from the
/// zero-filled matrix and draws the remaining `s - floor(beta s)` entries
/// without replacement with weight `x + y - x y` (relaxed) or `x + y`.
///
/// When fewer unobserved entries carry positive weight than are still
/// needed, the shortfall is drawn uniformly from the zero-weight ones.
pub fn two_phase_sample(
    m: &DenseMatrix,
    rank: usize,
    budget: usize,
    beta: f64,
    relaxed: bool,
    seed: u64,
) -> Result<TwoPhaseSample> {
    let (rows, cols) = m.dims();
    let size = rows * cols;
    if budget > size {
        return Err(Error::InvalidParameter(format!(
            "budget {budget} exceeds the {size} entries"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta must be in [0, 1], got {beta}")));
    }
    if rank == 0 || rank > rows.min(cols) {
        return Err(Error::RankOutOfRange {
            rank,
            max: rows.min(cols),
        });
    }
    let first = ((beta * budget as f64).floor() as usize).min(budget);
    let rest = budget - first;
    let phase_one = uniform_without_replacement(m, first, seed, PHASE_ONE_ROUND)?;
    if rest == 0 {
        return Ok(TwoPhaseSample {
            sample: phase_one,
            phase_one: first,
            phase_two: 0,
            row_masses: Vec::new(),
            col_masses: Vec::new(),
        });
    }
    if first == 0 {
        return Err(Error::DegeneratePhaseOne(
            "phase one is empty, scores of the zero matrix are undefined".into(),
        ));
    }
    let estimate = match truncated_svd(&observed_matrix(&phase_one), rank) {
        Ok(f) => f,
        Err(Error::ZeroRank) => {
            return Err(Error::DegeneratePhaseOne(
                "phase one observed only zeros".into(),
            ))
        }
        Err(e) => return Err(e),
    };
    let row_masses: Vec<f64> = (0..rows).map(|i| estimate.u().row(i).norm_squared().min(1.0)).collect();
    let col_masses: Vec<f64> = (0..cols).map(|j| estimate.v().row(j).norm_squared().min(1.0)).collect();

    let mut excluded = phase_one.mask();
    let mut weights = vec![0.0; size];
    let mut positive = 0;
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let (x, y) = (row_masses[i], col_masses[j]);
            weights[k] = if relaxed { relax(x, y) } else { x + y };
            positive += usize::from(!excluded[k] && weights[k] > 0.0);
        }
    }
    let weighted = rest.min(positive);
    let phase_two = weighted_without_replacement(m, &weights, &excluded, weighted, seed, PHASE_TWO_ROUND)?;
    let mut sample = phase_one.union(&phase_two)?;
    if weighted < rest {
        for o in phase_two.entries() {
            excluded[o.i * cols + o.j] = true;
        }
        let fill: Vec<f64> = excluded.iter().map(|&e| if e { 0.0 } else { 1.0 }).collect();
        let extra = weighted_without_replacement(m, &fill, &excluded, rest - weighted, seed, FILL_ROUND)?;
        sample = sample.union(&extra)?;
    }
    Ok(TwoPhaseSample {
        sample,
        phase_one: first,
        phase_two: rest,
        row_masses,
        col_masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{generate, Generator};
    use crate::solver::{complete, SolverConfig};

    #[test]
    fn beta_one_is_uniform() {
        let m = generate(12, 10, 2, &Generator::Incoherent, 1).unwrap();
        let s = two_phase_sample(&m, 2, 40, 1.0, true, 3).unwrap();
        assert_eq!(s.sample.len(), 40);
        assert_eq!(s.phase_two, 0);
        assert_eq!(s.sample, uniform_without_replacement(&m, 40, 3, PHASE_ONE_ROUND).unwrap());
    }

    #[test]
    fn beta_zero_is_rejected() {
        let m = generate(12, 10, 2, &Generator::Incoherent, 1).unwrap();
        assert!(matches!(
            two_phase_sample(&m, 2, 40, 0.0, true, 3),
            Err(Error::DegeneratePhaseOne(_))
        ));
    }

    #[test]
    fn budget_is_spent_exactly() {
        let m = generate(12, 10, 2, &Generator::spiked_default(), 1).unwrap();
        for (budget, beta) in [(30, 0.5), (119, 0.3), (120, 0.5), (60, 0.9)] {
            for relaxed in [true, false] {
                let s = two_phase_sample(&m, 2, budget, beta, relaxed, 7).unwrap();
                assert_eq!(s.sample.len(), budget);
            }
        }
        assert!(two_phase_sample(&m, 2, 121, 0.5, true, 7).is_err());
    }

    #[test]
    fn zero_weights_are_filled_uniformly() {
        // Rank-1 matrix supported on a 4x4 block: the estimated masses vanish
        // off that block, so most of phase two has zero weight.
        let m = DenseMatrix::from_fn(8, 8, |i, j| if i < 4 && j < 4 { 1.0 } else { 0.0 }).unwrap();
        let s = two_phase_sample(&m, 1, 64, 0.5, true, 0).unwrap();
        assert_eq!(s.sample.len(), 64);
    }

    #[test]
    fn full_budget_recovers_exactly() {
        let m = generate(12, 10, 2, &Generator::Incoherent, 5).unwrap();
        let s = two_phase_sample(&m, 2, 120, 0.5, true, 1).unwrap();
        let r = complete(&s.sample, &SolverConfig::default()).unwrap();
        assert!(r.solution.sub(&m).unwrap().frobenius_norm() <= 1e-9 * m.frobenius_norm());
    }
}
