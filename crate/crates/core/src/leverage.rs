//! Normalized leverage scores and the per-entry sampling probability schemes
//! built from them.
//!
//! With `x_i = mu_i r / m` and `y_j = nu_j r / n` (both in `[0, 1]`):
//!
//! * leveraged: `x_i + y_j`
//! * relaxed: `L_ij = x_i + y_j - x_i y_j`
//! * uniform: one value for every entry
//!
//! Each score is multiplied by the scheme constant (and optionally by
//! `ln^2(m + n)`), then clipped to `[floor, 1]`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::matcore::RankFactorization;
use crate::sampling::ProbabilityTable;

/// Row scores `mu_i = (m/r) ||U^T e_i||^2` and column scores
/// `nu_j = (n/r) ||V^T e_j||^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageProfile {
    row_scores: Vec<f64>,
    col_scores: Vec<f64>,
    rank: usize,
}

impl LeverageProfile {
    /// Builds a profile from explicit scores. The masses `mu_i r / m` and
    /// `nu_j r / n` must lie in `[0, 1]` (small round-off is clamped).
    pub fn from_scores(row_scores: Vec<f64>, col_scores: Vec<f64>, rank: usize) -> Result<Self> {
        if row_scores.is_empty() || col_scores.is_empty() {
            return Err(Error::EmptyMatrix {
                rows: row_scores.len(),
                cols: col_scores.len(),
            });
        }
        if rank == 0 || rank > row_scores.len().min(col_scores.len()) {
            return Err(Error::RankOutOfRange {
                rank,
                max: row_scores.len().min(col_scores.len()),
            });
        }
        let (m, n) = (row_scores.len() as f64, col_scores.len() as f64);
        let r = rank as f64;
        for (axis, scores, dim) in [("row", &row_scores, m), ("column", &col_scores, n)] {
            for (k, s) in scores.iter().enumerate() {
                let mass = s * r / dim;
                if !mass.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&mass) {
                    return Err(Error::InvalidParameter(format!(
                        "{axis} {k} leverage mass {mass} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            row_scores,
            col_scores,
            rank,
        })
    }

    pub fn rows(&self) -> usize {
        self.row_scores.len()
    }

    pub fn cols(&self) -> usize {
        self.col_scores.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn row_scores(&self) -> &[f64] {
        &self.row_scores
    }

    pub fn col_scores(&self) -> &[f64] {
        &self.col_scores
    }

    /// `mu_i r / m`, clamped to `[0, 1]`.
    #[inline]
    pub fn row_mass(&self, i: usize) -> f64 {
        (self.row_scores[i] * self.rank as f64 / self.rows() as f64).clamp(0.0, 1.0)
    }

    /// `nu_j r / n`, clamped to `[0, 1]`.
    #[inline]
    pub fn col_mass(&self, j: usize) -> f64 {
        (self.col_scores[j] * self.rank as f64 / self.cols() as f64).clamp(0.0, 1.0)
    }

    /// Largest row score; the coherence `mu_0` of the column space.
    pub fn max_row_score(&self) -> f64 {
        self.row_scores.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_col_score(&self) -> f64 {
        self.col_scores.iter().copied().fold(0.0, f64::max)
    }

    /// `(m + n) r - r^2`.
    pub fn degrees_of_freedom(&self) -> f64 {
        let r = self.rank as f64;
        (self.rows() + self.cols()) as f64 * r - r * r
    }

    /// Writes `kind,index,score` rows for plotting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "kind,index,score")?;
        for (i, s) in self.row_scores.iter().enumerate() {
            writeln!(out, "row,{i},{s:?}")?;
        }
        for (j, s) in self.col_scores.iter().enumerate() {
            writeln!(out, "col,{j},{s:?}")?;
        }
        Ok(())
    }
}

pub fn leverage_scores(fact: &RankFactorization) -> LeverageProfile {
    let (m, n, r) = (fact.rows(), fact.cols(), fact.rank());
    let row_scores = (0..m)
        .map(|i| m as f64 / r as f64 * fact.u().row(i).norm_squared())
        .collect();
    let col_scores = (0..n)
        .map(|j| n as f64 / r as f64 * fact.v().row(j).norm_squared())
        .collect();
    LeverageProfile {
        row_scores,
        col_scores,
        rank: r,
    }
}

/// `x + y - x y` for masses `x, y`.
#[inline]
pub fn relax(x: f64, y: f64) -> f64 {
    x + y - x * y
}

/// `L_ij` for entry `(i, j)` of the profile.
pub fn relaxed_score(profile: &LeverageProfile, i: usize, j: usize) -> Result<f64> {
    if i >= profile.rows() || j >= profile.cols() {
        return Err(Error::IndexOutOfRange {
            row: i,
            col: j,
            rows: profile.rows(),
            cols: profile.cols(),
        });
    }
    Ok(relax(profile.row_mass(i), profile.col_mass(j)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SchemeKind {
    Uniform,
    Leveraged,
    Relaxed,
    /// Externally supplied per-entry weights, scaled like the other kinds.
    Custom(ProbabilityTable),
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Uniform => "uniform",
            SchemeKind::Leveraged => "leveraged",
            SchemeKind::Relaxed => "relaxed",
            SchemeKind::Custom(_) => "custom",
        }
    }
}

/// `p_ij = max(min(constant * score_ij * [ln^2(m+n)], 1), floor)`.
///
/// For `Uniform` the score is 1, so `constant` is the common probability
/// (before the log factor).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityScheme {
    pub kind: SchemeKind,
    pub constant: f64,
    pub log_factor: bool,
    pub floor: f64,
}

impl ProbabilityScheme {
    /// The theorem-grade relaxed scheme: log factor on, floor `(mn)^-5`.
    pub fn theorem(constant: f64, rows: usize, cols: usize) -> Self {
        Self {
            kind: SchemeKind::Relaxed,
            constant,
            log_factor: true,
            floor: ((rows * cols) as f64).powi(-5),
        }
    }

    /// `min(c * L_ij, 1)`: the relaxed experiment scheme.
    pub fn relaxed(constant: f64) -> Self {
        Self {
            kind: SchemeKind::Relaxed,
            constant,
            log_factor: false,
            floor: 0.0,
        }
    }

    /// `min(c * (x_i + y_j), 1)`: the leveraged experiment scheme.
    pub fn leveraged(constant: f64) -> Self {
        Self {
            kind: SchemeKind::Leveraged,
            constant,
            log_factor: false,
            floor: 0.0,
        }
    }

    pub fn uniform(p: f64) -> Self {
        Self {
            kind: SchemeKind::Uniform,
            constant: p,
            log_factor: false,
            floor: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.constant.is_finite() && self.constant >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scheme constant must be finite and nonnegative, got {}",
                self.constant
            )));
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::InvalidParameter(format!(
                "floor must be in [0, 1], got {}",
                self.floor
            )));
        }
        Ok(())
    }
}

/// Per-entry probabilities of a scheme over the profile's `m x n` grid.
pub fn entry_probabilities(
    profile: &LeverageProfile,
    scheme: &ProbabilityScheme,
) -> Result<ProbabilityTable> {
    scheme.validate()?;
    let (m, n) = (profile.rows(), profile.cols());
    if let SchemeKind::Custom(table) = &scheme.kind {
        if table.dims() != (m, n) {
            return Err(Error::DimensionMismatch {
                expected: (m, n),
                actual: table.dims(),
            });
        }
    }
    let scale = if scheme.log_factor {
        let l = ((m + n) as f64).ln();
        scheme.constant * l * l
    } else {
        scheme.constant
    };
    let mut values = Vec::with_capacity(m * n);
    for i in 0..m {
        let x = profile.row_mass(i);
        for j in 0..n {
            let y = profile.col_mass(j);
            let score = match &scheme.kind {
                SchemeKind::Uniform => 1.0,
                SchemeKind::Leveraged => x + y,
                SchemeKind::Relaxed => relax(x, y),
                SchemeKind::Custom(table) => table.get(i, j),
            };
            values.push((scale * score).min(1.0).max(scheme.floor));
        }
    }
    ProbabilityTable::from_row_major(m, n, values)
}

/// `E[|Omega|] = sum_ij p_ij`.
pub fn expected_sample_size(table: &ProbabilityTable) -> f64 {
    table.values().iter().sum()
}
