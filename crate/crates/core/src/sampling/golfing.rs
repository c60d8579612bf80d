use super::set::draw_round;
use super::{ProbabilityTable, SampleSet};
use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

/// `ceil(11 ln(m + n))`.
pub fn default_rounds(rows: usize, cols: usize) -> usize {
    (11.0 * ((rows + cols) as f64).ln()).ceil() as usize
}

/// `q = 1 - (1 - p)^(1/k0)`, evaluated without cancellation for small `p`.
pub fn per_round_probability(p: f64, k0: usize) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    (-((-p).ln_1p() / k0 as f64).exp_m1()).clamp(0.0, 1.0)
}

/// `1 - (1 - q)^k0`, the marginal of the union of `k0` rounds.
pub fn union_probability(q: f64, k0: usize) -> f64 {
    if q >= 1.0 {
        return 1.0;
    }
    (-(k0 as f64 * (-q).ln_1p()).exp_m1()).min(1.0)
}

/// `k0` independent Bernoulli rounds with per-round probabilities `q_ij`.
#[derive(Clone, Debug)]
pub struct GolfingPartition {
    rounds: Vec<SampleSet>,
    per_round: ProbabilityTable,
}

impl GolfingPartition {
    pub fn k0(&self) -> usize {
        self.rounds.len()
    }

    pub fn rounds(&self) -> &[SampleSet] {
        &self.rounds
    }

    pub fn per_round_probability(&self) -> &ProbabilityTable {
        &self.per_round
    }

    /// `Omega = union of Omega_k`, each member carrying its marginal
    /// probability `1 - (1 - q_ij)^k0`.
    pub fn union(&self) -> SampleSet {
        let (m, n) = self.per_round.dims();
        let mut mask = vec![None; m * n];
        for round in &self.rounds {
            for o in round.entries() {
                mask[o.i * n + o.j].get_or_insert(o.value);
            }
        }
        let k0 = self.k0();
        let entries = mask
            .iter()
            .enumerate()
            .filter_map(|(k, v)| {
                v.map(|value| {
                    let (i, j) = (k / n, k % n);
                    super::Observation {
                        i,
                        j,
                        p: union_probability(self.per_round.get(i, j), k0),
                        value,
                    }
                })
            })
            .collect();
        let seed = self.rounds.first().map_or(0, |r| r.seed());
        SampleSet::from_sorted_unchecked(m, n, seed, entries)
    }
}

/// Splits a Bernoulli(`p_ij`) draw into `k0` rounds of Bernoulli(`q_ij`).
pub fn golfing_partition(
    m: &DenseMatrix,
    probabilities: &ProbabilityTable,
    k0: usize,
    seed: u64,
) -> Result<GolfingPartition> {
    if k0 == 0 {
        return Err(Error::InvalidParameter("k0 must be at least 1".into()));
    }
    let q = probabilities.map(|p| per_round_probability(p, k0))?;
    partition_from_round_probabilities(m, q, k0, seed)
}

/// Draws `k0` rounds directly from a per-round table.
pub fn partition_from_round_probabilities(
    m: &DenseMatrix,
    per_round: ProbabilityTable,
    k0: usize,
    seed: u64,
) -> Result<GolfingPartition> {
    if k0 == 0 {
        return Err(Error::InvalidParameter("k0 must be at least 1".into()));
    }
    let rounds = (1..=k0 as u64)
        .map(|k| draw_round(m, &per_round, seed, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(GolfingPartition { rounds, per_round })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_round_keeps_probability() {
        for p in [0.0, 0.1, 0.5, 0.99, 1.0] {
            assert!((per_round_probability(p, 1) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_values_for_eleven_rounds() {
        let q = per_round_probability(0.5, 11);
        // 0.5^(1/11) = exp(-ln 2 / 11)
        let want = 1.0 - (-(2f64.ln()) / 11.0).exp();
        assert!((q - want).abs() < 1e-15);
        assert!((q - 0.0611).abs() < 5e-5);
        assert!(q >= 0.5 / 11.0);
        assert!((union_probability(q, 11) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn round_probability_dominates_fraction() {
        for k0 in [1, 2, 5, 11, 40] {
            for k in 0..=100 {
                let p = k as f64 / 100.0;
                assert!(per_round_probability(p, k0) >= p / k0 as f64 - 1e-16);
            }
        }
    }

    #[test]
    fn certain_entries_are_in_every_round() {
        let m = DenseMatrix::zeros(3, 3).unwrap();
        let t = ProbabilityTable::constant(3, 3, 1.0).unwrap();
        let g = golfing_partition(&m, &t, 4, 1).unwrap();
        assert_eq!(g.k0(), 4);
        for r in g.rounds() {
            assert_eq!(r.len(), 9);
        }
        assert!(golfing_partition(&m, &t, 0, 1).is_err());
    }

    #[test]
    fn union_marginal_matches_p() {
        let (m, n) = (5, 4);
        let x = DenseMatrix::zeros(m, n).unwrap();
        let t = ProbabilityTable::from_fn(m, n, |i, j| 0.05 + 0.9 * ((i * n + j) as f64) / 20.0).unwrap();
        let k0 = default_rounds(m, n);
        let seeds = 5000;
        let mut hits = vec![0usize; m * n];
        for s in 0..seeds {
            let u = golfing_partition(&x, &t, k0, s).unwrap().union();
            for o in u.entries() {
                hits[o.i * n + o.j] += 1;
                assert!((o.p - t.get(o.i, o.j)).abs() < 1e-12);
            }
        }
        for (k, h) in hits.iter().enumerate() {
            let p = t.values()[k];
            let sd = (seeds as f64 * p * (1.0 - p)).sqrt();
            assert!((*h as f64 - seeds as f64 * p).abs() <= 3.0 * sd + 1e-9, "entry {k}");
        }
    }

    #[test]
    fn rounds_default() {
        assert_eq!(default_rounds(20, 15), (11.0 * 35f64.ln()).ceil() as usize);
        assert_eq!(default_rounds(20, 15), 40);
    }
}
