//! Synthetic low-rank matrices spanning incoherent to strongly coherent.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// `A B` with i.i.d. standard normal factors.
    Incoherent,
    /// Gaussian factors with the leading `rows` rows of `A` and `cols`
    /// columns of `B` multiplied by `factor`.
    Spiked { rows: usize, cols: usize, factor: f64 },
    /// Row `i` of `A` scaled by `(i + 1)^-exponent`, column `j` of `B` by
    /// `(j + 1)^-exponent`.
    PowerLaw { exponent: f64 },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Incoherent => "incoherent",
            Generator::Spiked { .. } => "spiked",
            Generator::PowerLaw { .. } => "power-law",
        }
    }

    /// One spiked row and one spiked column, scaled by 10.
    pub fn spiked_default() -> Self {
        Generator::Spiked {
            rows: 1,
            cols: 1,
            factor: 10.0,
        }
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// An `m x n` matrix of rank `rank` (almost surely) from `generator`.
pub fn generate(m: usize, n: usize, rank: usize, generator: &Generator, seed: u64) -> Result<DenseMatrix> {
    if rank == 0 || rank > m.min(n) {
        return Err(Error::RankOutOfRange {
            rank,
            max: m.min(n),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = gaussian(m, rank, &mut rng);
    let mut right = gaussian(rank, n, &mut rng);
    match *generator {
        Generator::Incoherent => {}
        Generator::Spiked { rows, cols, factor } => {
            if !(factor.is_finite() && factor > 0.0) || rows > m || cols > n {
                return Err(Error::InvalidParameter(format!(
                    "spike of {rows} rows, {cols} columns, factor {factor} does not fit {m}x{n}"
                )));
            }
            for i in 0..rows {
                left.row_mut(i).scale_mut(factor);
            }
            for j in 0..cols {
                right.column_mut(j).scale_mut(factor);
            }
        }
        Generator::PowerLaw { exponent } => {
            if !(exponent.is_finite() && exponent >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "power-law exponent must be nonnegative, got {exponent}"
                )));
            }
            for i in 0..m {
                left.row_mut(i).scale_mut((i as f64 + 1.0).powf(-exponent));
            }
            for j in 0..n {
                right.column_mut(j).scale_mut((j as f64 + 1.0).powf(-exponent));
            }
        }
    }
    DenseMatrix::try_from(left * right)
}
