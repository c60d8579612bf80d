//! Equality-constrained nuclear-norm minimization
//! `min ||X||_* s.t. X_ij = M_ij on Omega` by scaled ADMM.
//!
//! The splitting is `min ||Z||_* + 1_A(X)` subject to `Z = X`, with `A` the
//! affine set of matrices agreeing with the observations:
//!
//! ```text
//! Z <- svt(X - W, 1/rho)
//! X <- proj_A(Z + W)        (overwrite the observed entries)
//! W <- W + Z - X
//! ```
//!
//! `W` stays supported on `Omega`, so `||Z - X||_F` is exactly the
//! constraint violation of `Z` on the observed entries.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;
use crate::sampling::SampleSet;

const BALANCE_RATIO: f64 = 10.0;
const BALANCE_FACTOR: f64 = 2.0;
const BALANCE_EVERY: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative constraint residual (and relative step) at which to stop.
    pub tolerance: f64,
    /// Penalty `rho`. `None` picks `1 / mean |observed value|`, i.e. the
    /// first shrinkage threshold equals the mean observed magnitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    pub penalty_adapt: bool,
    /// Record `iter,objective,residual` per iteration.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-7,
            penalty: None,
            penalty_adapt: true,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if let Some(rho) = self.penalty {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "penalty must be positive, got {rho}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub solution: DenseMatrix,
    pub iterations: usize,
    /// `||P_Omega(X* - M)||_F / max(1, ||P_Omega(M)||_F)`.
    pub constraint_residual: f64,
    /// `||X*||_*`.
    pub objective: f64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl RecoveryReport {
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,objective,residual")?;
        for row in &self.trace {
            writeln!(out, "{},{:?},{:?}", row.iteration, row.objective, row.residual)?;
        }
        Ok(())
    }
}

/// Singular value soft-thresholding: `U max(Sigma - threshold, 0) V^T`.
pub fn svt_prox(x: &DenseMatrix, threshold: f64) -> Result<DenseMatrix> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite and nonnegative, got {threshold}"
        )));
    }
    let (y, _) = shrink(x.as_matrix(), threshold)?;
    Ok(DenseMatrix::from_matrix_unchecked(y))
}

/// Returns the shrunk matrix and its nuclear norm.
fn shrink(x: &DMatrix<f64>, threshold: f64) -> Result<(DMatrix<f64>, f64)> {
    let (u, sigma, v) = crate::matcore::thin_svd_raw(x)?;
    let kept: Vec<(usize, f64)> = sigma
        .iter()
        .enumerate()
        .filter_map(|(k, s)| (*s > threshold).then_some((k, s - threshold)))
        .collect();
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    if kept.is_empty() {
        return Ok((out, 0.0));
    }
    let mut left = DMatrix::zeros(x.nrows(), kept.len());
    let mut right = DMatrix::zeros(kept.len(), x.ncols());
    let mut nuclear = 0.0;
    for (dst, &(src, s)) in kept.iter().enumerate() {
        left.set_column(dst, &(u.column(src) * s));
        right.set_row(dst, &v.column(src).transpose());
        nuclear += s;
    }
    left.mul_to(&right, &mut out);
    Ok((out, nuclear))
}

fn overwrite_observed(x: &mut DMatrix<f64>, sample: &SampleSet) {
    for o in sample.entries() {
        x[(o.i, o.j)] = o.value;
    }
}

fn observed_residual(z: &DMatrix<f64>, sample: &SampleSet) -> f64 {
    sample
        .entries()
        .iter()
        .map(|o| (z[(o.i, o.j)] - o.value).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Solves from the zero-filled start `X^0 = P_Omega(M)`.
pub fn complete(sample: &SampleSet, config: &SolverConfig) -> Result<RecoveryReport> {
    let (m, n) = sample.dims();
    let mut start = DMatrix::zeros(m, n);
    overwrite_observed(&mut start, sample);
    solve(sample, config, start)
}

/// Solves from an arbitrary start; the observed entries of `start` are
/// overwritten before the first iteration.
pub fn complete_with_start(
    sample: &SampleSet,
    config: &SolverConfig,
    start: &DenseMatrix,
) -> Result<RecoveryReport> {
    start.check_dims(sample.dims())?;
    let mut x = start.as_matrix().clone();
    overwrite_observed(&mut x, sample);
    solve(sample, config, x)
}

fn solve(sample: &SampleSet, config: &SolverConfig, mut x: DMatrix<f64>) -> Result<RecoveryReport> {
    config.validate()?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let (m, n) = sample.dims();
    let observed_norm = sample
        .entries()
        .iter()
        .map(|o| o.value * o.value)
        .sum::<f64>()
        .sqrt();
    let scale = observed_norm.max(1.0);

    if sample.len() == m * n {
        let nuclear = DenseMatrix::from_matrix_unchecked(x.clone());
        let objective = crate::matcore::full_singular_values(&nuclear)?.iter().sum();
        let trace = if config.trace {
            vec![TraceRow {
                iteration: 1,
                objective,
                residual: 0.0,
            }]
        } else {
            Vec::new()
        };
        return Ok(RecoveryReport {
            solution: nuclear,
            iterations: 1,
            constraint_residual: 0.0,
            objective,
            converged: true,
            trace,
        });
    }

    let mean_abs = sample.entries().iter().map(|o| o.value.abs()).sum::<f64>() / sample.len() as f64;
    let mut rho = match config.penalty {
        Some(rho) => rho,
        None if mean_abs > 0.0 => 1.0 / mean_abs,
        None => 1.0,
    };
    let mut w = DMatrix::<f64>::zeros(m, n);
    let mut z = DMatrix::<f64>::zeros(m, n);
    let mut objective = 0.0;
    let mut primal = f64::INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let adapt_until = config.max_iterations / 2;

    for iter in 1..=config.max_iterations {
        iterations = iter;
        let (next_z, nuclear) = shrink(&(&x - &w), 1.0 / rho)?;
        z = next_z;
        objective = nuclear;

        let mut next_x = &z + &w;
        overwrite_observed(&mut next_x, sample);
        let step = (&next_x - &x).norm();
        x = next_x;
        // W += Z - X, nonzero only on Omega.
        for o in sample.entries() {
            w[(o.i, o.j)] += z[(o.i, o.j)] - o.value;
        }

        primal = observed_residual(&z, sample);
        let dual = rho * step;
        if config.trace {
            trace.push(TraceRow {
                iteration: iter,
                objective,
                residual: primal / scale,
            });
        }
        if primal / scale <= config.tolerance && step / x.norm().max(1.0) <= config.tolerance {
            converged = true;
            break;
        }
        if config.penalty_adapt && iter % BALANCE_EVERY == 0 && iter <= adapt_until {
            // Scaled dual W = Y / rho must be rescaled with rho.
            if primal > BALANCE_RATIO * dual {
                rho *= BALANCE_FACTOR;
                w /= BALANCE_FACTOR;
            } else if dual > BALANCE_RATIO * primal {
                rho /= BALANCE_FACTOR;
                w *= BALANCE_FACTOR;
            }
        }
    }

    Ok(RecoveryReport {
        solution: DenseMatrix::from_matrix_unchecked(z),
        iterations,
        constraint_residual: primal / scale,
        objective,
        converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::truncated_svd;
    use crate::sampling::{draw_bernoulli, Observation, ProbabilityTable};

    #[test]
    fn zero_threshold_is_identity() {
        let x = DenseMatrix::from_row_major(2, 3, vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0]).unwrap();
        let y = svt_prox(&x, 0.0).unwrap();
        assert!(y.sub(&x).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn large_threshold_is_zero() {
        let x = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let top = truncated_svd(&x, 1).unwrap().sigma()[0];
        assert_eq!(svt_prox(&x, top).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn diagonal_shrinkage() {
        let x = DenseMatrix::from_row_major(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let y = svt_prox(&x, 2.0).unwrap();
        let want = [1.0, 0.0, 0.0, 0.0];
        for (a, b) in y.to_row_major().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(svt_prox(&x, -1.0).is_err());
    }

    #[test]
    fn full_observation_returns_input() {
        let m = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 7.0]).unwrap();
        let s = draw_bernoulli(&m, &ProbabilityTable::constant(2, 3, 1.0).unwrap(), 0).unwrap();
        let r = complete(&s, &SolverConfig::default()).unwrap();
        assert_eq!(r.solution, m);
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        let sv: f64 = crate::matcore::full_singular_values(&m).unwrap().iter().sum();
        assert!((r.objective - sv).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_is_rejected() {
        let m = DenseMatrix::zeros(2, 2).unwrap();
        let s = draw_bernoulli(&m, &ProbabilityTable::constant(2, 2, 0.0).unwrap(), 0).unwrap();
        assert!(matches!(complete(&s, &SolverConfig::default()), Err(Error::EmptySample)));
    }

    #[test]
    fn rank_one_two_by_two() {
        let obs = |i, j, value| Observation { i, j, p: 0.75, value };
        let s = SampleSet::from_observations(2, 2, 0, vec![obs(0, 0, 1.0), obs(0, 1, 2.0), obs(1, 0, 2.0)]).unwrap();
        let r = complete(&s, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        // Independent oracle: golden-section search on t -> ||[[1,2],[2,t]]||_*.
        let f = |t: f64| {
            let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, t]).unwrap();
            crate::matcore::full_singular_values(&a).unwrap().iter().sum::<f64>()
        };
        let (mut lo, mut hi) = (-10.0_f64, 10.0_f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let t = 0.5 * (lo + hi);
        assert!((r.solution.get(1, 1) - t).abs() < 1e-3, "{} vs {t}", r.solution.get(1, 1));
    }

    #[test]
    fn trace_is_recorded() {
        let obs = |i, j, value| Observation { i, j, p: 0.5, value };
        let s = SampleSet::from_observations(2, 2, 0, vec![obs(0, 0, 1.0), obs(1, 1, 1.0)]).unwrap();
        let cfg = SolverConfig {
            trace: true,
            max_iterations: 5,
            ..SolverConfig::default()
        };
        let r = complete(&s, &cfg).unwrap();
        assert_eq!(r.trace.len(), r.iterations);
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective,residual\n1,"));
    }
}
