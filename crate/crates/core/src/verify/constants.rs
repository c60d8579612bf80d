use crate::error::{Error, Result};
use crate::leverage::{relax, LeverageProfile};
use crate::sampling::{default_rounds, ProbabilityTable};

/// Constants of the recovery guarantee and its supporting lemmas.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoryConstants {
    /// Failure exponent, `c > 3`.
    pub c: f64,
    /// Per-round constant of the golfing probabilities.
    pub c0: f64,
    /// Probability constant of the full sample, `c1 = 11 c0`.
    pub c1: f64,
    /// Row-sampling constant, `c2 >= 20 c`.
    pub c2: f64,
    pub k0: usize,
}

impl TheoryConstants {
    /// `c = 3.5`, `c0 = 264 c`, `c1 = 11 c0`, `c2 = 20 c`, `k0 = ceil(11 ln(m + n))`.
    pub fn theory_grade(rows: usize, cols: usize) -> Self {
        let c = 3.5;
        let c0 = 264.0 * c;
        Self {
            c,
            c0,
            c1: 11.0 * c0,
            c2: 20.0 * c,
            k0: default_rounds(rows, cols),
        }
    }

    /// Theory-grade `c`, `c2` and `k0` with a chosen per-round constant.
    pub fn with_c0(rows: usize, cols: usize, c0: f64) -> Self {
        Self {
            c0,
            c1: 11.0 * c0,
            ..Self::theory_grade(rows, cols)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.c, self.c0, self.c1, self.c2]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.k0 == 0 {
            return Err(Error::InvalidParameter(format!(
                "theory constants must be positive with k0 >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// `q_ij = min(c0 ln(m + n) L_ij, 1)`.
    pub fn round_probabilities(&self, profile: &LeverageProfile) -> Result<ProbabilityTable> {
        self.validate()?;
        let (m, n) = (profile.rows(), profile.cols());
        let scale = self.c0 * ((m + n) as f64).ln();
        ProbabilityTable::from_fn(m, n, |i, j| {
            (scale * relax(profile.row_mass(i), profile.col_mass(j))).min(1.0)
        })
    }

    /// Row probability `min(c2 mu0 r ln(m) / m, 1)` for the row-sampling lemma.
    pub fn row_probability(&self, rows: usize, rank: usize, mu0: f64) -> f64 {
        (self.c2 * mu0 * rank as f64 * (rows as f64).ln() / rows as f64).min(1.0)
    }
}

/// `2 sqrt(c sigma^2 ln(m + n)) + c gamma ln(m + n)`.
pub fn bernstein_bound(c: f64, sigma_sq: f64, gamma: f64, rows: usize, cols: usize) -> f64 {
    let l = ((rows + cols) as f64).ln();
    2.0 * (c * sigma_sq * l).sqrt() + c * gamma * l
}
