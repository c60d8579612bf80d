use nalgebra::DMatrix;

use super::{full_singular_values, DenseMatrix};
use crate::error::{Error, Result};
use crate::leverage::LeverageProfile;

/// Matrix norms of a single matrix. The leverage-weighted norms are present
/// only when a profile was supplied.
#[derive(Clone, Debug, PartialEq)]
pub struct NormBundle {
    pub spectral: f64,
    pub frobenius: f64,
    pub nuclear: f64,
    pub max_entry: f64,
    /// `mu(inf, 2)`: largest leverage-weighted row or column l2 norm.
    pub mu_inf2: Option<f64>,
    /// `mu(inf)`: largest leverage-weighted entry.
    pub mu_inf: Option<f64>,
}

pub fn norms(x: &DenseMatrix, profile: Option<&LeverageProfile>) -> Result<NormBundle> {
    let sv = full_singular_values(x)?;
    let spectral = sv.first().copied().unwrap_or(0.0);
    let nuclear = sv.iter().sum();
    let (mu_inf2, mu_inf) = match profile {
        Some(p) => {
            x.check_dims((p.rows(), p.cols()))?;
            (
                Some(mu_inf2_norm(x.as_matrix(), p)?),
                Some(mu_inf_norm(x.as_matrix(), p)?),
            )
        }
        None => (None, None),
    };
    Ok(NormBundle {
        spectral,
        frobenius: x.frobenius_norm(),
        nuclear,
        max_entry: x.as_matrix().amax(),
        mu_inf2,
        mu_inf,
    })
}

/// `max { max_i sqrt(m/(mu_i r)) ||Z_i*||, max_j sqrt(n/(nu_j r)) ||Z_*j|| }`.
pub(crate) fn mu_inf2_norm(z: &DMatrix<f64>, profile: &LeverageProfile) -> Result<f64> {
    let mut best = 0.0_f64;
    for i in 0..z.nrows() {
        let norm = z.row(i).norm();
        if norm == 0.0 {
            continue;
        }
        let mass = profile.row_mass(i);
        if mass <= 0.0 {
            return Err(Error::InfiniteWeight {
                axis: "row",
                index: i,
            });
        }
        best = best.max(norm / mass.sqrt());
    }
    for j in 0..z.ncols() {
        let norm = z.column(j).norm();
        if norm == 0.0 {
            continue;
        }
        let mass = profile.col_mass(j);
        if mass <= 0.0 {
            return Err(Error::InfiniteWeight {
                axis: "column",
                index: j,
            });
        }
        best = best.max(norm / mass.sqrt());
    }
    Ok(best)
}

/// `max_ij |Z_ij| sqrt(m/(mu_i r)) sqrt(n/(nu_j r))`.
pub(crate) fn mu_inf_norm(z: &DMatrix<f64>, profile: &LeverageProfile) -> Result<f64> {
    let mut best = 0.0_f64;
    for j in 0..z.ncols() {
        let col_mass = profile.col_mass(j);
        for i in 0..z.nrows() {
            let value = z[(i, j)].abs();
            if value == 0.0 {
                continue;
            }
            let row_mass = profile.row_mass(i);
            if row_mass <= 0.0 {
                return Err(Error::InfiniteWeight {
                    axis: "row",
                    index: i,
                });
            }
            if col_mass <= 0.0 {
                return Err(Error::InfiniteWeight {
                    axis: "column",
                    index: j,
                });
            }
            best = best.max(value / (row_mass * col_mass).sqrt());
        }
    }
    Ok(best)
}
