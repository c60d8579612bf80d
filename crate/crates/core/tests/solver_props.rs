mod common;

use common::random_matrix;
use proptest::prelude::*;
use relaxmc::harness::{generate, Generator};
use relaxmc::leverage::{entry_probabilities, ProbabilityScheme};
use relaxmc::matcore::{full_singular_values, truncated_svd, DenseMatrix};
use relaxmc::recovery::profile_of;
use relaxmc::sampling::{draw_bernoulli, ProbabilityTable, SampleSet};
use relaxmc::solver::{complete, complete_with_start, svt_prox, SolverConfig};
use relaxmc::verify::{build_dual_certificate, TheoryConstants};

fn nuclear(x: &DenseMatrix) -> f64 {
    full_singular_values(x).unwrap().iter().sum()
}

fn relaxed_sample(m: &DenseMatrix, rank: usize, c: f64, seed: u64) -> SampleSet {
    let table = entry_probabilities(&profile_of(m, rank).unwrap(), &ProbabilityScheme::relaxed(c)).unwrap();
    draw_bernoulli(m, &table, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn svt_is_the_prox(m in 1usize..10, n in 1usize..10, tau in 0.0f64..2.0, seed: u64) {
        let x = random_matrix(m, n, seed);
        let y = svt_prox(&x, tau).unwrap();
        let value = |z: &DenseMatrix| 0.5 * z.sub(&x).unwrap().frobenius_norm().powi(2) + tau * nuclear(z);
        let best = value(&y);
        for k in 0..100u64 {
            let z = random_matrix(m, n, seed.wrapping_add(k + 1)).scale(0.5).unwrap().add(&y).unwrap();
            prop_assert!(best <= value(&z) + 1e-10);
        }
        let low = random_matrix(m, n, seed ^ 5).scale(0.0).unwrap();
        prop_assert!(best <= value(&low) + 1e-10);
    }

    #[test]
    fn converged_output_is_feasible(seed in 0u64..1000) {
        let m = generate(15, 12, 2, &Generator::Incoherent, seed).unwrap();
        let s = relaxed_sample(&m, 2, 3.0, seed);
        let config = SolverConfig::default();
        let r = complete(&s, &config).unwrap();
        if r.converged {
            prop_assert!(r.constraint_residual <= config.tolerance);
        }
    }
}

// ADMM iterates are not feasible before convergence, so the nuclear norm of
// the SVT iterate oscillates around the optimum; what holds is convergence
// to the optimum and a shrinking deviation from it.
#[test]
fn objective_settles_on_the_optimum() {
    for seed in 0..6 {
        let m = generate(30, 25, 2, &Generator::Incoherent, seed).unwrap();
        let s = relaxed_sample(&m, 2, 3.0, seed);
        let r = complete(&s, &SolverConfig { trace: true, ..SolverConfig::default() }).unwrap();
        assert!(r.converged);
        let truth = nuclear(&m);
        assert!((r.objective - truth).abs() <= 1e-6 * truth, "seed {seed}");
        let dev: Vec<f64> = r.trace.iter().skip(10).map(|t| (t.objective - r.objective).abs()).collect();
        let half = dev.len() / 2;
        let early = dev[..half].iter().cloned().fold(0.0, f64::max);
        let late = dev[half..].iter().cloned().fold(0.0, f64::max);
        assert!(late <= early + 1e-9 * truth, "seed {seed}: {late} > {early}");
    }
}

#[test]
fn certified_instances_have_one_solution() {
    let mut checked = 0;
    for seed in 0..10u64 {
        let m = generate(20, 15, 2, &Generator::Incoherent, seed).unwrap();
        let fact = truncated_svd(&m, 2).unwrap();
        let constants = TheoryConstants::with_c0(20, 15, 1.0);
        let q = constants.round_probabilities(&profile_of(&m, 2).unwrap()).unwrap();
        let partition = relaxmc::sampling::partition_from_round_probabilities(&m, q, constants.k0, seed).unwrap();
        let (_, report) = build_dual_certificate(&fact, &partition).unwrap();
        if !report.passed_practical {
            continue;
        }
        checked += 1;
        let sample = partition.union();
        let config = SolverConfig {
            tolerance: 1e-10,
            max_iterations: 5000,
            ..SolverConfig::default()
        };
        let a = complete(&sample, &config).unwrap();
        let start = random_matrix(20, 15, seed ^ 99).scale(5.0).unwrap();
        let b = complete_with_start(&sample, &config, &start).unwrap();
        let gap = a.solution.sub(&b.solution).unwrap().frobenius_norm();
        assert!(gap <= 1e-4, "seed {seed}: {gap}");
    }
    assert!(checked >= 8, "only {checked} certified instances");
}

#[test]
fn one_missing_entry_matches_grid_search() {
    // [[1, 2], [2, t]] has minimal nuclear norm at t = 4.
    let full = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
    let table = ProbabilityTable::from_fn(2, 2, |i, j| if i == 1 && j == 1 { 0.0 } else { 1.0 }).unwrap();
    let s = draw_bernoulli(&full, &table, 0).unwrap();
    let r = complete(&s, &SolverConfig::default()).unwrap();
    let best = (-100_000..=100_000)
        .map(|k| k as f64 * 1e-4)
        .min_by(|a, b| {
            let f = |t: f64| nuclear(&DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, t]]).unwrap());
            f(*a).total_cmp(&f(*b))
        })
        .unwrap();
    assert!((r.solution.get(1, 1) - best).abs() <= 1e-3);
}
