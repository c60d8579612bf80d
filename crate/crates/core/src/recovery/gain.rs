use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::protocol::{profile_of, recover_with_profile, TrialProtocol, TrialSummary};
use crate::error::{Error, Result};
use crate::leverage::{LeverageProfile, ProbabilityScheme};
use crate::matcore::DenseMatrix;

pub const DEFAULT_SWEEP_CAP: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeFamily {
    Relaxed,
    Leveraged,
}

impl SchemeFamily {
    pub fn scheme(self, constant: f64) -> ProbabilityScheme {
        match self {
            SchemeFamily::Relaxed => ProbabilityScheme::relaxed(constant),
            SchemeFamily::Leveraged => ProbabilityScheme::leveraged(constant),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeFamily::Relaxed => "relaxed",
            SchemeFamily::Leveraged => "leveraged",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepStep {
    pub constant: u32,
    pub successes: usize,
    pub trials_run: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub family: SchemeFamily,
    pub constant: u32,
    /// All trials at the calibrated constant.
    pub summary: TrialSummary,
    pub sweep: Vec<SweepStep>,
}

impl Calibration {
    /// Mean `|Omega|` over the successful trials at the calibrated constant.
    pub fn sample_size(&self) -> f64 {
        self.summary.mean_successful_sample_size().unwrap_or(f64::NAN)
    }
}

/// Smallest integer `c` in `1..=cap` at which the scheme passes the
/// protocol (no log factor, no floor).
pub fn calibrate_constant(
    m: &DenseMatrix,
    rank: usize,
    family: SchemeFamily,
    protocol: &TrialProtocol,
    seed: u64,
    cap: u32,
) -> Result<Calibration> {
    protocol.validate()?;
    let profile = profile_of(m, rank)?;
    calibrate_with_profile(m, &profile, family, protocol, seed, cap)
}

pub(crate) fn calibrate_with_profile(
    m: &DenseMatrix,
    profile: &LeverageProfile,
    family: SchemeFamily,
    protocol: &TrialProtocol,
    seed: u64,
    cap: u32,
) -> Result<Calibration> {
    let mut sweep = Vec::new();
    for c in 1..=cap {
        let summary = recover_with_profile(m, profile, &family.scheme(c as f64), protocol, seed, true)?;
        sweep.push(SweepStep {
            constant: c,
            successes: summary.successes,
            trials_run: summary.records.len(),
        });
        if summary.passed {
            return Ok(Calibration {
                family,
                constant: c,
                summary,
                sweep,
            });
        }
    }
    Err(Error::CalibrationFailed { cap })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainReport {
    pub rank: usize,
    pub c_l: u32,
    pub c_r: u32,
    pub s_l: f64,
    pub s_r: f64,
    /// `sqrt((s_l - s_r) / c_r)`; `None` when `s_l < s_r`.
    pub delta_s: Option<f64>,
    pub leveraged: Calibration,
    pub relaxed: Calibration,
}

impl GainReport {
    pub fn negative_gain(&self) -> bool {
        self.delta_s.is_none()
    }

    pub fn csv_row(&self) -> String {
        let delta = self.delta_s.map_or(String::new(), |d| format!("{d:?}"));
        format!(
            "{},{},{},{:?},{:?},{},{}",
            self.rank,
            self.c_l,
            self.c_r,
            self.s_l,
            self.s_r,
            delta,
            self.negative_gain()
        )
    }

    /// Per-trial rows of both calibrated runs.
    pub fn trial_rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for cal in [&self.leveraged, &self.relaxed] {
            for r in &cal.summary.records {
                rows.push(format!(
                    "{},{},{},{},{},{},{:?},{},{},{}",
                    self.rank,
                    cal.family.name(),
                    cal.constant,
                    r.trial,
                    r.seed,
                    r.sample_size,
                    r.error,
                    r.converged,
                    r.iterations,
                    r.success
                ));
            }
        }
        rows
    }
}

pub const GAIN_CSV_HEADER: &str = "rank,c_l,c_r,s_l,s_r,delta_s,negative_gain";
pub const TRIALS_CSV_HEADER: &str = "rank,scheme,constant,trial,seed,sample_size,error,converged,iterations,success";

pub fn write_gain_csv<W: Write>(reports: &[GainReport], mut out: W) -> Result<()> {
    writeln!(out, "{GAIN_CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_trials_csv<W: Write>(reports: &[GainReport], mut out: W) -> Result<()> {
    writeln!(out, "{TRIALS_CSV_HEADER}")?;
    for r in reports {
        for row in r.trial_rows() {
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}

/// Plain-text table with columns rank, `c_l/c_r` and the normalized gain.
pub fn render_table(reports: &[GainReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:<9} {:>8}", "rank", "c_l/c_r", "delta_s");
    for r in reports {
        let delta = r.delta_s.map_or("negative".to_string(), |d| format!("{d:.1}"));
        let _ = writeln!(
            out,
            "{:<8} {:<9} {:>8}",
            r.rank,
            format!("{}/{}", r.c_l, r.c_r),
            delta
        );
    }
    out
}

/// Calibrates both schemes under one master seed and compares their mean
/// successful sample sizes.
pub fn gain_report(
    m: &DenseMatrix,
    rank: usize,
    protocol: &TrialProtocol,
    seed: u64,
    cap: u32,
) -> Result<GainReport> {
    protocol.validate()?;
    let profile = profile_of(m, rank)?;
    let leveraged = calibrate_with_profile(m, &profile, SchemeFamily::Leveraged, protocol, seed, cap)?;
    let relaxed = calibrate_with_profile(m, &profile, SchemeFamily::Relaxed, protocol, seed, cap)?;
    let (s_l, s_r) = (leveraged.sample_size(), relaxed.sample_size());
    let c_r = relaxed.constant;
    let delta_s = (s_l >= s_r).then(|| ((s_l - s_r) / c_r as f64).sqrt());
    Ok(GainReport {
        rank,
        c_l: leveraged.constant,
        c_r,
        s_l,
        s_r,
        delta_s,
        leveraged,
        relaxed,
    })
}
