//! Python bindings. Matrices cross the boundary as lists of rows.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use relaxmc::harness::{generate as generate_matrix, Generator};
use relaxmc::leverage::{entry_probabilities, leverage_scores, relaxed_score, LeverageProfile, ProbabilityScheme, SchemeKind};
use relaxmc::matcore::{truncated_svd, DenseMatrix};
use relaxmc::recovery::{gain_report as run_gain_report, GainReport, TrialProtocol, DEFAULT_SWEEP_CAP};
use relaxmc::sampling::{draw_bernoulli, ProbabilityTable, SampleSet};
use relaxmc::solver::{complete as run_complete, SolverConfig};
use relaxmc::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        Error::CalibrationFailed { .. } | Error::SvdNoConvergence | Error::EigenNoConvergence => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn dense(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(to_py)
}

fn table(rows: Vec<Vec<f64>>) -> PyResult<ProbabilityTable> {
    let (m, n) = (rows.len(), rows.first().map_or(0, Vec::len));
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("ragged probability table"));
    }
    ProbabilityTable::from_row_major(m, n, rows.into_iter().flatten().collect()).map_err(to_py)
}

fn scheme_kind(name: &str) -> PyResult<SchemeKind> {
    match name {
        "uniform" => Ok(SchemeKind::Uniform),
        "leveraged" => Ok(SchemeKind::Leveraged),
        "relaxed" => Ok(SchemeKind::Relaxed),
        other => Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    }
}

/// Row and column leverage scores at a fixed rank.
#[pyclass(name = "LeverageProfile", frozen)]
struct PyLeverageProfile {
    inner: LeverageProfile,
}

#[pymethods]
impl PyLeverageProfile {
    #[getter]
    fn row_scores(&self) -> Vec<f64> {
        self.inner.row_scores().to_vec()
    }

    #[getter]
    fn col_scores(&self) -> Vec<f64> {
        self.inner.col_scores().to_vec()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn degrees_of_freedom(&self) -> f64 {
        self.inner.degrees_of_freedom()
    }

    fn relaxed_score(&self, i: usize, j: usize) -> PyResult<f64> {
        relaxed_score(&self.inner, i, j).map_err(to_py)
    }

    /// Per-entry probabilities `min(c * score, 1)` of a scheme.
    #[pyo3(signature = (scheme = "relaxed", constant = 3.0, log_factor = false))]
    fn probabilities(&self, scheme: &str, constant: f64, log_factor: bool) -> PyResult<Vec<Vec<f64>>> {
        let scheme = ProbabilityScheme {
            kind: scheme_kind(scheme)?,
            constant,
            log_factor,
            floor: 0.0,
        };
        let t = entry_probabilities(&self.inner, &scheme).map_err(to_py)?;
        Ok(t.values().chunks(t.cols().max(1)).map(<[f64]>::to_vec).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "LeverageProfile(rows={}, cols={}, rank={})",
            self.inner.rows(),
            self.inner.cols(),
            self.inner.rank()
        )
    }
}

/// Observed entries with their sampling probabilities.
#[pyclass(name = "Sample", frozen)]
struct PySample {
    inner: SampleSet,
}

#[pymethods]
impl PySample {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.dims()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// `(i, j, p, value)` per observed entry, in row-major order.
    fn entries(&self) -> Vec<(usize, usize, f64, f64)> {
        self.inner.entries().iter().map(|o| (o.i, o.j, o.p, o.value)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, ij: (usize, usize)) -> bool {
        self.inner.contains(ij.0, ij.1)
    }
}

#[pyclass(name = "Completion", frozen, get_all)]
struct PyCompletion {
    solution: Vec<Vec<f64>>,
    iterations: usize,
    objective: f64,
    constraint_residual: f64,
    converged: bool,
}

#[pyclass(name = "GainReport", frozen, get_all)]
struct PyGainReport {
    rank: usize,
    c_l: u32,
    c_r: u32,
    s_l: f64,
    s_r: f64,
    delta_s: Option<f64>,
    leveraged_successes: usize,
    relaxed_successes: usize,
}

impl From<GainReport> for PyGainReport {
    fn from(r: GainReport) -> Self {
        Self {
            rank: r.rank,
            c_l: r.c_l,
            c_r: r.c_r,
            s_l: r.s_l,
            s_r: r.s_r,
            delta_s: r.delta_s,
            leveraged_successes: r.leveraged.summary.successes,
            relaxed_successes: r.relaxed.summary.successes,
        }
    }
}

/// Synthetic rank-`rank` matrix: `incoherent`, `spiked` or `power-law`.
#[pyfunction]
#[pyo3(signature = (rows, cols, rank, generator = "incoherent", seed = 0))]
fn generate(rows: usize, cols: usize, rank: usize, generator: &str, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let g = match generator {
        "incoherent" => Generator::Incoherent,
        "spiked" => Generator::spiked_default(),
        "power-law" => Generator::PowerLaw { exponent: 1.0 },
        other => return Err(PyValueError::new_err(format!("unknown generator {other:?}"))),
    };
    Ok(generate_matrix(rows, cols, rank, &g, seed).map_err(to_py)?.to_rows())
}

#[pyfunction]
fn leverage(matrix: Vec<Vec<f64>>, rank: usize) -> PyResult<PyLeverageProfile> {
    let fact = truncated_svd(&dense(matrix)?, rank).map_err(to_py)?;
    Ok(PyLeverageProfile {
        inner: leverage_scores(&fact),
    })
}

/// Keeps entry `(i, j)` with probability `probabilities[i][j]`.
#[pyfunction]
#[pyo3(signature = (matrix, probabilities, seed = 0))]
fn sample(matrix: Vec<Vec<f64>>, probabilities: Vec<Vec<f64>>, seed: u64) -> PyResult<PySample> {
    let inner = draw_bernoulli(&dense(matrix)?, &table(probabilities)?, seed).map_err(to_py)?;
    Ok(PySample { inner })
}

/// Minimum nuclear norm matrix agreeing with the sample.
#[pyfunction]
#[pyo3(signature = (sample, max_iterations = None, tolerance = None))]
fn complete(py: Python<'_>, sample: &PySample, max_iterations: Option<usize>, tolerance: Option<f64>) -> PyResult<PyCompletion> {
    let defaults = SolverConfig::default();
    let config = SolverConfig {
        max_iterations: max_iterations.unwrap_or(defaults.max_iterations),
        tolerance: tolerance.unwrap_or(defaults.tolerance),
        ..defaults
    };
    let report = py.detach(|| run_complete(&sample.inner, &config)).map_err(to_py)?;
    Ok(PyCompletion {
        solution: report.solution.to_rows(),
        iterations: report.iterations,
        objective: report.objective,
        constraint_residual: report.constraint_residual,
        converged: report.converged,
    })
}

/// Calibrates the leveraged and relaxed schemes and compares sample sizes.
#[pyfunction]
#[pyo3(signature = (matrix, rank, seed = 0, trials = 10, success_min = 9, epsilon = 1e-3, sweep_cap = DEFAULT_SWEEP_CAP))]
#[allow(clippy::too_many_arguments)]
fn gain_report(
    py: Python<'_>,
    matrix: Vec<Vec<f64>>,
    rank: usize,
    seed: u64,
    trials: usize,
    success_min: usize,
    epsilon: f64,
    sweep_cap: u32,
) -> PyResult<PyGainReport> {
    let m = dense(matrix)?;
    let protocol = TrialProtocol {
        trials,
        success_threshold: success_min,
        epsilon,
        ..TrialProtocol::default()
    };
    let report = py
        .detach(|| run_gain_report(&m, rank, &protocol, seed, sweep_cap))
        .map_err(to_py)?;
    Ok(report.into())
}

#[pymodule]
fn relaxmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLeverageProfile>()?;
    m.add_class::<PySample>()?;
    m.add_class::<PyCompletion>()?;
    m.add_class::<PyGainReport>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(leverage, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(complete, m)?)?;
    m.add_function(wrap_pyfunction!(gain_report, m)?)?;
    Ok(())
}
