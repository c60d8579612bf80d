use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leverage::{entry_probabilities, expected_sample_size, leverage_scores, LeverageProfile, ProbabilityScheme};
use crate::matcore::{truncated_svd, DenseMatrix};
use crate::sampling::rng::derive_seed;
use crate::sampling::{draw_bernoulli, ProbabilityTable};
use crate::solver::{complete, SolverConfig};

const TRIAL_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    /// `||X* - M||_F / ||M||_F < epsilon`.
    #[serde(alias = "rel")]
    Relative,
    /// `||X* - M||_F < epsilon`.
    #[serde(alias = "abs")]
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialProtocol {
    pub trials: usize,
    #[serde(alias = "success_min")]
    pub success_threshold: usize,
    pub epsilon: f64,
    pub error_mode: ErrorMode,
    pub solver: SolverConfig,
}

impl Default for TrialProtocol {
    fn default() -> Self {
        Self {
            trials: 10,
            success_threshold: 9,
            epsilon: 1e-3,
            error_mode: ErrorMode::Relative,
            solver: SolverConfig::default(),
        }
    }
}

impl TrialProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.success_threshold > self.trials {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= trials and success_threshold <= trials, got {} of {}",
                self.success_threshold, self.trials
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        self.solver.validate()
    }

    /// Seed of trial `t` under master seed `seed`; shared by every scheme.
    pub fn trial_seed(seed: u64, t: usize) -> u64 {
        derive_seed(seed, TRIAL_STREAM, t as u64)
    }

    fn error_of(&self, x: &DenseMatrix, m: &DenseMatrix) -> Result<f64> {
        let diff = x.sub(m)?.frobenius_norm();
        Ok(match self.error_mode {
            ErrorMode::Absolute => diff,
            ErrorMode::Relative => {
                let norm = m.frobenius_norm();
                if norm > 0.0 {
                    diff / norm
                } else {
                    diff
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub sample_size: usize,
    /// Recovery error in the protocol's mode; infinite when the solver
    /// could not run (empty sample).
    pub error: f64,
    pub converged: bool,
    pub iterations: usize,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialSummary {
    pub scheme: String,
    pub constant: f64,
    pub expected_sample_size: f64,
    pub records: Vec<TrialRecord>,
    pub successes: usize,
    /// True when at least `success_threshold` of the protocol's trials
    /// succeeded.
    pub passed: bool,
}

impl TrialSummary {
    pub fn mean_sample_size(&self) -> f64 {
        mean(self.records.iter().map(|r| r.sample_size as f64))
    }

    /// Mean `|Omega|` over successful trials; `None` without successes.
    pub fn mean_successful_sample_size(&self) -> Option<f64> {
        (self.successes > 0).then(|| mean(self.records.iter().filter(|r| r.success).map(|r| r.sample_size as f64)))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Leverage profile of the rank-`rank` part of `m`.
pub fn profile_of(m: &DenseMatrix, rank: usize) -> Result<LeverageProfile> {
    let fact = truncated_svd(m, rank)?;
    if fact.rank() < rank {
        return Err(Error::InvalidParameter(format!(
            "matrix has numerical rank {} below the requested {rank}",
            fact.rank()
        )));
    }
    Ok(leverage_scores(&fact))
}

fn run_trial(
    m: &DenseMatrix,
    table: &ProbabilityTable,
    protocol: &TrialProtocol,
    seed: u64,
    t: usize,
) -> Result<TrialRecord> {
    let trial_seed = TrialProtocol::trial_seed(seed, t);
    let sample = draw_bernoulli(m, table, trial_seed)?;
    let mut record = TrialRecord {
        trial: t,
        seed: trial_seed,
        sample_size: sample.len(),
        error: f64::INFINITY,
        converged: false,
        iterations: 0,
        success: false,
    };
    if sample.is_empty() {
        return Ok(record);
    }
    match complete(&sample, &protocol.solver) {
        Ok(report) => {
            record.error = protocol.error_of(&report.solution, m)?;
            record.converged = report.converged;
            record.iterations = report.iterations;
            record.success = record.error < protocol.epsilon;
        }
        // Numerical breakdown of a single trial counts as a failure.
        Err(Error::SvdNoConvergence) => {}
        Err(e) => return Err(e),
    }
    Ok(record)
}

/// Runs every trial of the protocol (in parallel) against the probability
/// table of `scheme`.
pub fn recover_with_scheme(
    m: &DenseMatrix,
    rank: usize,
    scheme: &ProbabilityScheme,
    protocol: &TrialProtocol,
    seed: u64,
) -> Result<TrialSummary> {
    protocol.validate()?;
    let profile = profile_of(m, rank)?;
    recover_with_profile(m, &profile, scheme, protocol, seed, false)
}

/// With `stop_early`, trials run sequentially and stop as soon as the
/// protocol can no longer pass; the summary then holds only the trials run.
pub(crate) fn recover_with_profile(
    m: &DenseMatrix,
    profile: &LeverageProfile,
    scheme: &ProbabilityScheme,
    protocol: &TrialProtocol,
    seed: u64,
    stop_early: bool,
) -> Result<TrialSummary> {
    let table = entry_probabilities(profile, scheme)?;
    let records = if stop_early {
        let allowed_failures = protocol.trials - protocol.success_threshold;
        let mut records = Vec::with_capacity(protocol.trials);
        let mut failures = 0;
        for t in 0..protocol.trials {
            let r = run_trial(m, &table, protocol, seed, t)?;
            failures += usize::from(!r.success);
            records.push(r);
            if failures > allowed_failures {
                break;
            }
        }
        records
    } else {
        (0..protocol.trials)
            .into_par_iter()
            .map(|t| run_trial(m, &table, protocol, seed, t))
            .collect::<Result<Vec<_>>>()?
    };
    let successes = records.iter().filter(|r| r.success).count();
    Ok(TrialSummary {
        scheme: scheme.kind.name().to_string(),
        constant: scheme.constant,
        expected_sample_size: expected_sample_size(&table),
        passed: successes >= protocol.success_threshold,
        successes,
        records,
    })
}
