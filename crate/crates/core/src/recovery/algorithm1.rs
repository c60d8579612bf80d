//! Completion of a matrix whose column space is incoherent: observe a few
//! full rows, read the column scores off their span, then sample by the
//! relaxed score with the row masses replaced by the bound `mu0 r / m`.

use super::protocol::{ErrorMode, TrialProtocol};
use crate::error::{Error, Result};
use crate::leverage::{leverage_scores, relax};
use crate::matcore::{truncated_svd, DenseMatrix};
use crate::sampling::rng::derive_seed;
use crate::sampling::{draw_bernoulli, sample_full_rows, ProbabilityTable, SampleSet};
use crate::solver::{complete, RecoveryReport, SolverConfig};

const ROW_STREAM: u64 = 2;
const ENTRY_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Algorithm1Config {
    /// Upper bound on the row scores, `1 <= mu0 <= m / r`.
    pub mu0: f64,
    pub c1: f64,
    pub c2: f64,
    pub solver: SolverConfig,
}

#[derive(Clone, Debug)]
pub struct Algorithm1Report {
    pub recovery: Option<RecoveryReport>,
    pub row_probability: f64,
    pub rows: Vec<usize>,
    /// Column scores of the span of the observed rows.
    pub estimated_col_scores: Vec<f64>,
    /// Rank of `S_Gamma(M)` found at the cutoff, at most `rank`.
    pub sampled_rank: usize,
    pub omega: SampleSet,
    /// `|Gamma| n + |Omega|`.
    pub total_samples: usize,
    /// `p m n + sum p_ij`.
    pub expected_total_samples: f64,
    /// Set when the largest measured row score exceeds `mu0`.
    pub coherence_warning: Option<String>,
}

impl Algorithm1Report {
    pub fn rank_deficient(&self, rank: usize) -> bool {
        self.sampled_rank < rank
    }
}

/// `max(c1, c2) mu0 ((m + 2n) r - r^2) ln^2(m + n)`.
pub fn algorithm1_sample_bound(m: usize, n: usize, rank: usize, config: &Algorithm1Config) -> f64 {
    let r = rank as f64;
    let l = ((m + n) as f64).ln();
    config.c1.max(config.c2) * config.mu0 * ((m + 2 * n) as f64 * r - r * r) * l * l
}

/// Row probability `min(c2 mu0 r ln(m) / m, 1)`.
pub fn row_probability(m: usize, rank: usize, mu0: f64, c2: f64) -> f64 {
    (c2 * mu0 * rank as f64 * (m as f64).ln() / m as f64).min(1.0)
}

pub fn algorithm1_column_incoherent(
    m: &DenseMatrix,
    rank: usize,
    config: &Algorithm1Config,
    seed: u64,
) -> Result<Algorithm1Report> {
    let (rows, cols) = m.dims();
    if rank == 0 || rank > rows.min(cols) {
        return Err(Error::RankOutOfRange {
            rank,
            max: rows.min(cols),
        });
    }
    let upper = rows as f64 / rank as f64;
    if !(config.mu0 >= 1.0 && config.mu0 <= upper) {
        return Err(Error::InvalidParameter(format!(
            "mu0 = {} outside [1, m/r = {upper}]",
            config.mu0
        )));
    }
    if !(config.c1 > 0.0 && config.c2 > 0.0) {
        return Err(Error::InvalidParameter("c1 and c2 must be positive".into()));
    }

    let coherence_warning = match truncated_svd(m, rank) {
        Ok(f) => {
            let measured = leverage_scores(&f).max_row_score();
            (measured > config.mu0 * (1.0 + 1e-9)).then(|| {
                format!("largest row score {measured:.4} exceeds mu0 = {}", config.mu0)
            })
        }
        Err(_) => None,
    };

    let p = row_probability(rows, rank, config.mu0, config.c2);
    let picked = sample_full_rows(m, p, derive_seed(seed, ROW_STREAM, 0))?;

    // Column masses nu_j r / n of the span of the sampled rows.
    let (masses, sampled_rank) = match truncated_svd(&picked.submatrix, rank) {
        Ok(f) => {
            let v = f.v();
            ((0..cols).map(|j| v.row(j).norm_squared().min(1.0)).collect::<Vec<_>>(), f.rank())
        }
        Err(Error::ZeroRank) => (vec![0.0; cols], 0),
        Err(e) => return Err(e),
    };
    let estimated_col_scores = masses.iter().map(|y| y * cols as f64 / rank as f64).collect();

    let x = config.mu0 * rank as f64 / rows as f64;
    let l = ((rows + cols) as f64).ln();
    let scale = config.c1 * l * l;
    let table = ProbabilityTable::from_fn(rows, cols, |_, j| (scale * relax(x, masses[j])).min(1.0))?;
    let omega = draw_bernoulli(m, &table, derive_seed(seed, ENTRY_STREAM, 0))?;

    let recovery = if omega.is_empty() {
        None
    } else {
        Some(complete(&omega, &config.solver)?)
    };
    let expected_total_samples = p * (rows * cols) as f64 + table.values().iter().sum::<f64>();
    Ok(Algorithm1Report {
        recovery,
        row_probability: p,
        total_samples: picked.rows.len() * cols + omega.len(),
        rows: picked.rows,
        estimated_col_scores,
        sampled_rank,
        omega,
        expected_total_samples,
        coherence_warning,
    })
}

/// Per-trial outcome of Algorithm 1 under a trial protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct Algorithm1Trial {
    pub seed: u64,
    pub total_samples: usize,
    pub error: f64,
    pub success: bool,
}

/// Runs `protocol.trials` independent executions and scores each as in the
/// trial protocol.
pub fn algorithm1_trials(
    m: &DenseMatrix,
    rank: usize,
    config: &Algorithm1Config,
    protocol: &TrialProtocol,
    seed: u64,
) -> Result<Vec<Algorithm1Trial>> {
    protocol.validate()?;
    let norm = m.frobenius_norm();
    (0..protocol.trials)
        .map(|t| {
            let trial_seed = TrialProtocol::trial_seed(seed, t);
            let report = algorithm1_column_incoherent(m, rank, config, trial_seed)?;
            let error = match &report.recovery {
                Some(r) => {
                    let diff = r.solution.sub(m)?.frobenius_norm();
                    match protocol.error_mode {
                        ErrorMode::Relative if norm > 0.0 => diff / norm,
                        _ => diff,
                    }
                }
                None => f64::INFINITY,
            };
            Ok(Algorithm1Trial {
                seed: trial_seed,
                total_samples: report.total_samples,
                error,
                success: error < protocol.epsilon,
            })
        })
        .collect()
}
