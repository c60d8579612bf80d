//! Monte-Carlo frequencies of the sampling lemmas behind the recovery
//! guarantee, plus the deterministic checks (the relaxed-score chain and
//! the off-sample perturbation bound).

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::constants::{bernstein_bound, TheoryConstants};
use crate::error::Result;
use crate::leverage::{leverage_scores, relax, LeverageProfile};
use crate::matcore::{
    full_singular_values, mu_inf2_norm, mu_inf_norm, operator_norm_pt_romega_pt_minus_pt, DenseMatrix,
    RankFactorization, Subspace,
};
use crate::sampling::rng::derive_seed;
use crate::sampling::{draw_bernoulli, r_omega_raw, sample_full_rows, ProbabilityTable, SampleSet};

const OMEGA_STREAM: u64 = 10;
const GAUSSIAN_STREAM: u64 = 11;
const ROWS_STREAM: u64 = 12;
const PERTURB_OMEGA_STREAM: u64 = 13;
const PERTURB_STREAM: u64 = 14;

/// Slack for inequalities that hold exactly in exact arithmetic.
const RELATIVE_SLACK: f64 = 1e-9;
const ABSOLUTE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSuiteConfig {
    /// Constant `C` of the sample `p_ij = min(C L_ij, 1)` on which the
    /// off-sample perturbation bound is checked.
    pub perturbation_constant: f64,
    pub perturbations_per_seed: usize,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            perturbation_constant: 3.0,
            perturbations_per_seed: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaRow {
    pub lemma: String,
    pub seed_count: usize,
    pub passes: usize,
    pub mean_lhs: f64,
    pub mean_rhs: f64,
}

impl LemmaRow {
    pub fn pass_rate(&self) -> f64 {
        if self.seed_count == 0 {
            f64::NAN
        } else {
            self.passes as f64 / self.seed_count as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSuite {
    pub rows: Vec<LemmaRow>,
}

impl LemmaSuite {
    pub fn row(&self, lemma: &str) -> Option<&LemmaRow> {
        self.rows.iter().find(|r| r.lemma == lemma)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "lemma,seed_count,pass_rate,mean_lhs,mean_rhs")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:?},{:?},{:?}",
                r.lemma,
                r.seed_count,
                r.pass_rate(),
                r.mean_lhs,
                r.mean_rhs
            )?;
        }
        Ok(())
    }
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Clone, Copy, Debug)]
struct Check {
    lhs: f64,
    rhs: f64,
}

impl Check {
    fn holds(self) -> bool {
        self.lhs <= self.rhs * (1.0 + RELATIVE_SLACK) + ABSOLUTE_SLACK
    }
}

fn spectral(x: DMatrix<f64>) -> Result<f64> {
    Ok(full_singular_values(&DenseMatrix::from_matrix_unchecked(x))?
        .first()
        .copied()
        .unwrap_or(0.0))
}

fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng))
}

/// Checks keyed by row name, for one seed.
type SeedChecks = Vec<(&'static str, Check)>;

struct Context<'a> {
    fact: &'a RankFactorization,
    sub: Subspace,
    profile: LeverageProfile,
    constants: &'a TheoryConstants,
    config: &'a LemmaSuiteConfig,
    q: ProbabilityTable,
    carrier: DenseMatrix,
}

impl Context<'_> {
    fn dims(&self) -> (usize, usize) {
        self.sub.dims()
    }

    /// Lemmas on one golfing-round sample `Omega~ ~ Bernoulli(q)`.
    fn round_lemmas(&self, seed: u64, out: &mut SeedChecks) -> Result<()> {
        let (m, n) = self.dims();
        let (c, c0) = (self.constants.c, self.constants.c0);
        let omega = draw_bernoulli(&self.carrier, &self.q, derive_seed(seed, OMEGA_STREAM, 0))?;

        let cond = operator_norm_pt_romega_pt_minus_pt(&self.sub, &omega)?;
        out.push(("lemma1", Check { lhs: cond, rhs: 0.5 }));
        let s = 1.0 / (c0 * ((m + n) as f64).ln());
        out.push((
            "lemma1-bernstein",
            Check {
                lhs: cond,
                rhs: bernstein_bound(c, s, s, m, n),
            },
        ));

        let uvt = self.fact.uv_t().into_matrix();
        let z_gauss = gaussian(m, n, derive_seed(seed, GAUSSIAN_STREAM, 0));
        for (z, tag) in [(&z_gauss, "gaussian"), (&uvt, "uvt")] {
            let mu2 = mu_inf2_norm(z, &self.profile)?;
            let mu = mu_inf_norm(z, &self.profile)?;
            let rz = r_omega_raw(&omega, z)?;

            let lhs2 = spectral(&rz - z)?;
            let rhs2 = 2.0 * (c / c0).sqrt() * mu2 + c / c0 * mu;
            out.push((lemma_name(2, tag), Check { lhs: lhs2, rhs: rhs2 }));

            let x = self.sub.project_t_raw(&rz) - self.sub.project_t_raw(z);
            let lhs3 = mu_inf2_norm(&x, &self.profile)?;
            out.push((lemma_name(3, tag), Check { lhs: lhs3, rhs: 0.5 * (mu2 + mu) }));
            out.push((
                "lemma3-bernstein",
                Check {
                    lhs: lhs3,
                    rhs: (20.0 * c / c0).sqrt() * mu2 + 2.0 * c / c0 * mu,
                },
            ));

            let lhs4 = mu_inf_norm(&x, &self.profile)?;
            out.push((lemma_name(4, tag), Check { lhs: lhs4, rhs: 0.5 * mu }));
            out.push((
                "lemma4-bernstein",
                Check {
                    lhs: lhs4,
                    rhs: (4.0 * (c / c0).sqrt() + c / c0) * mu,
                },
            ));
        }
        Ok(())
    }

    /// `||(1/p) U^T S_Gamma(U) - I|| <= 1/2` for rows kept with probability
    /// `p = min(c2 mu0 r ln(m) / m, 1)`.
    fn row_lemma(&self, seed: u64, out: &mut SeedChecks) -> Result<()> {
        let (m, n) = self.dims();
        let r = self.fact.rank();
        let u = self.fact.u();
        let mu0 = self.profile.max_row_score();
        let p = self.constants.row_probability(m, r, mu0);
        let picked = sample_full_rows(&self.carrier, p, derive_seed(seed, ROWS_STREAM, 0))?;
        let mut gram = DMatrix::<f64>::zeros(r, r);
        for &i in &picked.rows {
            let ui = u.row(i);
            gram += ui.transpose() * ui;
        }
        let dev = gram / p - DMatrix::identity(r, r);
        let lhs = spectral(dev)?;
        out.push(("lemma5", Check { lhs, rhs: 0.5 }));
        let s = mu0 * r as f64 / (p * m as f64);
        out.push((
            "lemma5-bernstein",
            Check {
                lhs,
                rhs: bernstein_bound(self.constants.c, s, s, m, n),
            },
        ));
        Ok(())
    }

    /// `||P_T Z||_F <= (1 - ||P_T R P_T - P_T||)^{-1/2} max_Omega p^{-1/2} ||P_{T-perp} Z||_*`
    /// for Gaussian `Z` vanishing on `Omega`; skipped when the operator
    /// norm is at least 1 and the bound is void.
    fn perturbation_lemma(&self, seed: u64, out: &mut SeedChecks) -> Result<()> {
        let (m, n) = self.dims();
        let scale = self.config.perturbation_constant;
        let table = ProbabilityTable::from_fn(m, n, |i, j| {
            (scale * relax(self.profile.row_mass(i), self.profile.col_mass(j))).min(1.0)
        })?;
        let omega = draw_bernoulli(&self.carrier, &table, derive_seed(seed, PERTURB_OMEGA_STREAM, 0))?;
        let cond = operator_norm_pt_romega_pt_minus_pt(&self.sub, &omega)?;
        if cond >= 1.0 || omega.len() == m * n {
            return Ok(());
        }
        let factor = (1.0 - cond).powf(-0.5) * max_inv_sqrt_p(&omega);
        let mask = omega.mask();
        for k in 0..self.config.perturbations_per_seed {
            let mut z = gaussian(m, n, derive_seed(seed, PERTURB_STREAM, k as u64));
            for i in 0..m {
                for j in 0..n {
                    if mask[i * n + j] {
                        z[(i, j)] = 0.0;
                    }
                }
            }
            let pt = self.sub.project_t_raw(&z);
            let perp = DenseMatrix::from_matrix_unchecked(&z - &pt);
            let nuclear: f64 = full_singular_values(&perp)?.iter().sum();
            out.push((
                "lemma8",
                Check {
                    lhs: pt.norm(),
                    rhs: factor * nuclear,
                },
            ));
        }
        Ok(())
    }
}

fn max_inv_sqrt_p(omega: &SampleSet) -> f64 {
    omega
        .entries()
        .iter()
        .map(|o| 1.0 / o.p.sqrt())
        .fold(0.0, f64::max)
}

fn lemma_name(lemma: u8, tag: &str) -> &'static str {
    match (lemma, tag) {
        (2, "gaussian") => "lemma2-gaussian",
        (2, _) => "lemma2-uvt",
        (3, "gaussian") => "lemma3-gaussian",
        (3, _) => "lemma3-uvt",
        (4, "gaussian") => "lemma4-gaussian",
        _ => "lemma4-uvt",
    }
}

const ROW_ORDER: [&str; 13] = [
    "lemma1",
    "lemma1-bernstein",
    "lemma2-gaussian",
    "lemma2-uvt",
    "lemma3-gaussian",
    "lemma3-uvt",
    "lemma3-bernstein",
    "lemma4-gaussian",
    "lemma4-uvt",
    "lemma4-bernstein",
    "lemma5",
    "lemma5-bernstein",
    "lemma8",
];

pub fn lemma_suite(fact: &RankFactorization, constants: &TheoryConstants, seeds: &[u64]) -> Result<LemmaSuite> {
    lemma_suite_with(fact, constants, seeds, &LemmaSuiteConfig::default())
}

/// Runs every lemma once per seed (seeds in parallel) and aggregates in
/// seed order.
pub fn lemma_suite_with(
    fact: &RankFactorization,
    constants: &TheoryConstants,
    seeds: &[u64],
    config: &LemmaSuiteConfig,
) -> Result<LemmaSuite> {
    constants.validate()?;
    let profile = leverage_scores(fact);
    let ctx = Context {
        fact,
        sub: Subspace::new(fact.clone()),
        q: constants.round_probabilities(&profile)?,
        profile,
        constants,
        config,
        carrier: fact.reconstruct(),
    };
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let mut checks = Vec::new();
            ctx.round_lemmas(seed, &mut checks)?;
            ctx.row_lemma(seed, &mut checks)?;
            ctx.perturbation_lemma(seed, &mut checks)?;
            Ok(checks)
        })
        .collect::<Result<Vec<SeedChecks>>>()?;
    let rows = ROW_ORDER
        .iter()
        .map(|&name| {
            let checks: Vec<Check> = per_seed
                .iter()
                .flatten()
                .filter(|(n, _)| *n == name)
                .map(|(_, c)| *c)
                .collect();
            let count = checks.len();
            let mean = |f: fn(&Check) -> f64| {
                if count == 0 {
                    f64::NAN
                } else {
                    checks.iter().map(f).sum::<f64>() / count as f64
                }
            };
            LemmaRow {
                lemma: name.to_string(),
                seed_count: count,
                passes: checks.iter().filter(|c| c.holds()).count(),
                mean_lhs: mean(|c| c.lhs),
                mean_rhs: mean(|c| c.rhs),
            }
        })
        .collect();
    Ok(LemmaSuite { rows })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma6Report {
    pub checked: usize,
    pub violations: usize,
}

/// `x + y - x y >= sqrt(x y) >= x y` on a `grid x grid` lattice of
/// `[0, 1]^2` (endpoints included) and on `random_pairs` uniform pairs.
pub fn lemma6_check(grid: usize, random_pairs: usize, seed: u64) -> Lemma6Report {
    let holds = |x: f64, y: f64| {
        let g = (x * y).sqrt();
        relax(x, y) >= g && g >= x * y
    };
    let mut checked = 0;
    let mut violations = 0;
    let steps = grid.max(2) - 1;
    for a in 0..=steps {
        for b in 0..=steps {
            let (x, y) = (a as f64 / steps as f64, b as f64 / steps as f64);
            checked += 1;
            violations += usize::from(!holds(x, y));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_pairs {
        let (x, y): (f64, f64) = (rng.random(), rng.random());
        checked += 1;
        violations += usize::from(!holds(x, y));
    }
    Lemma6Report { checked, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{generate, Generator};
    use crate::matcore::truncated_svd;

    fn fact(m: usize, n: usize, r: usize, seed: u64) -> RankFactorization {
        truncated_svd(&generate(m, n, r, &Generator::Incoherent, seed).unwrap(), r).unwrap()
    }

    #[test]
    fn saturated_rounds_have_zero_left_sides() {
        let f = fact(20, 15, 2, 1);
        let suite = lemma_suite(&f, &TheoryConstants::theory_grade(20, 15), &[1, 2, 3]).unwrap();
        for name in ["lemma1", "lemma2-gaussian", "lemma2-uvt", "lemma3-uvt", "lemma4-gaussian"] {
            let row = suite.row(name).unwrap();
            assert_eq!(row.seed_count, 3);
            assert_eq!(row.pass_rate(), 1.0, "{name}");
            assert!(row.mean_lhs < 1e-12, "{name}: {}", row.mean_lhs);
        }
        assert_eq!(suite.row("lemma5").unwrap().pass_rate(), 1.0);
    }

    #[test]
    fn perturbation_bound_always_holds() {
        let f = fact(20, 15, 2, 2);
        let seeds: Vec<u64> = (0..20).collect();
        let cfg = LemmaSuiteConfig {
            perturbation_constant: 4.0,
            perturbations_per_seed: 3,
        };
        let suite = lemma_suite_with(&f, &TheoryConstants::theory_grade(20, 15), &seeds, &cfg).unwrap();
        let row = suite.row("lemma8").unwrap();
        assert!(row.seed_count > 0);
        assert_eq!(row.passes, row.seed_count);
    }

    #[test]
    fn csv_layout() {
        let f = fact(12, 10, 2, 3);
        let suite = lemma_suite(&f, &TheoryConstants::theory_grade(12, 10), &[7]).unwrap();
        let mut buf = Vec::new();
        suite.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("lemma,seed_count,pass_rate,mean_lhs,mean_rhs"));
        assert_eq!(lines.count(), ROW_ORDER.len());
    }

    #[test]
    fn lemma6_boundary_and_grid() {
        let r = lemma6_check(200, 1000, 1);
        assert_eq!(r.checked, 200 * 200 + 1000);
        assert_eq!(r.violations, 0);
        assert_eq!(relax(1.0, 1.0), 1.0);
    }
}
