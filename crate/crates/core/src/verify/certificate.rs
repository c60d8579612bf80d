use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matcore::{full_singular_values, operator_norm_pt_romega_pt_minus_pt, DenseMatrix, RankFactorization, Subspace};
use crate::sampling::{r_omega_raw, GolfingPartition, SampleSet};

/// `pt_gap` bound used at desk scale next to the literal one.
pub const PRACTICAL_GAP_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    /// `||P_T(Y) - U V^T||_F`.
    pub pt_gap: f64,
    /// `||P_{T-perp}(Y)||`.
    pub tperp_norm: f64,
    /// `Y` vanishes exactly outside `Omega`.
    pub supported_on_omega: bool,
    /// `||P_T R_Omega P_T - P_T||`.
    pub condition1: f64,
    /// `sqrt(r (m + n)^-15)`.
    pub literal_gap_threshold: f64,
    /// All four conditions with the literal gap threshold.
    pub passed: bool,
    /// All four conditions with `pt_gap <= PRACTICAL_GAP_THRESHOLD`.
    pub passed_practical: bool,
    /// `||U V^T - P_T(W_k)||_F` for `k = 0..=k0`; empty when the
    /// certificate was not built by golfing.
    pub gap_history: Vec<f64>,
}

impl CertificateReport {
    /// Rounds `k` with `gap(k) <= ratio * gap(k - 1)`, out of the rounds whose
    /// previous gap sits above `floor` (below it only rounding is left).
    pub fn decay_counts(&self, ratio: f64, floor: f64) -> (usize, usize) {
        let mut held = 0;
        let mut rounds = 0;
        for w in self.gap_history.windows(2) {
            if w[0] <= floor {
                continue;
            }
            rounds += 1;
            held += usize::from(w[1] <= ratio * w[0]);
        }
        (held, rounds)
    }

    pub fn csv_header() -> &'static str {
        "seed,pt_gap,tperp_norm,condition1,supported_on_omega,literal_gap_threshold,passed,practical_gap_threshold,passed_practical"
    }

    pub fn csv_row(&self, seed: u64) -> String {
        format!(
            "{seed},{:?},{:?},{:?},{},{:?},{},{:?},{}",
            self.pt_gap,
            self.tperp_norm,
            self.condition1,
            self.supported_on_omega,
            self.literal_gap_threshold,
            self.passed,
            PRACTICAL_GAP_THRESHOLD,
            self.passed_practical
        )
    }
}

pub fn write_certificate_csv<W: Write>(rows: &[(u64, CertificateReport)], mut out: W) -> Result<()> {
    writeln!(out, "{}", CertificateReport::csv_header())?;
    for (seed, r) in rows {
        writeln!(out, "{}", r.csv_row(*seed))?;
    }
    Ok(())
}

/// Golfing: `W_k = W_{k-1} + R_{Omega_k} P_T(U V^T - P_T(W_{k-1}))` from
/// `W_0 = 0`, returning `Y = W_{k0}` checked against the union of the rounds.
pub fn build_dual_certificate(
    fact: &RankFactorization,
    partition: &GolfingPartition,
) -> Result<(DenseMatrix, CertificateReport)> {
    let sub = Subspace::new(fact.clone());
    let uvt = fact.uv_t().into_matrix();
    let (m, n) = (fact.rows(), fact.cols());
    let mut w = DMatrix::zeros(m, n);
    let mut history = Vec::with_capacity(partition.k0() + 1);
    if partition.per_round_probability().dims() != (m, n) {
        return Err(Error::DimensionMismatch {
            expected: (m, n),
            actual: partition.per_round_probability().dims(),
        });
    }
    for round in partition.rounds() {
        let delta = &uvt - sub.project_t_raw(&w);
        history.push(delta.norm());
        w += r_omega_raw(round, &sub.project_t_raw(&delta))?;
    }
    history.push((&uvt - sub.project_t_raw(&w)).norm());
    let y = DenseMatrix::from_matrix_unchecked(w);
    let mut report = check_proposition1(fact, &partition.union(), &y)?;
    report.gap_history = history;
    Ok((y, report))
}

/// Evaluates both optimality conditions for a candidate certificate `Y`.
pub fn check_proposition1(fact: &RankFactorization, sample: &SampleSet, y: &DenseMatrix) -> Result<CertificateReport> {
    let sub = Subspace::new(fact.clone());
    y.check_dims(sub.dims())?;
    let (m, n) = sub.dims();
    let pt_y = sub.project_t_raw(y.as_matrix());
    let pt_gap = (&pt_y - fact.uv_t().into_matrix()).norm();
    let perp = DenseMatrix::from_matrix_unchecked(y.as_matrix() - pt_y);
    let tperp_norm = full_singular_values(&perp)?.first().copied().unwrap_or(0.0);
    let mask = sample.mask();
    let ya = y.as_matrix();
    let supported_on_omega = (0..m).all(|i| (0..n).all(|j| mask[i * n + j] || ya[(i, j)] == 0.0));
    let condition1 = operator_norm_pt_romega_pt_minus_pt(&sub, sample)?;
    let literal_gap_threshold = (fact.rank() as f64 * ((m + n) as f64).powi(-15)).sqrt();
    let rest = condition1 <= 0.5 && tperp_norm <= 0.5 && supported_on_omega;
    Ok(CertificateReport {
        pt_gap,
        tperp_norm,
        supported_on_omega,
        condition1,
        literal_gap_threshold,
        passed: rest && pt_gap <= literal_gap_threshold,
        passed_practical: rest && pt_gap <= PRACTICAL_GAP_THRESHOLD,
        gap_history: Vec::new(),
    })
}
