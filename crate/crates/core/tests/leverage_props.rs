mod common;

use common::{instance, oracle_relaxed};
use proptest::prelude::*;
use relaxmc::leverage::{
    entry_probabilities, expected_sample_size, leverage_scores, relax, relaxed_score, ProbabilityScheme,
};
use relaxmc::matcore::truncated_svd;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sandwich(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let g = (x * y).sqrt();
        prop_assert!(relax(x, y) >= g);
        prop_assert!(g >= x * y);
    }

    #[test]
    fn scores_match_qr_bases(m in 2usize..40, n in 2usize..40, r in 1usize..6, seed: u64) {
        let r = r.min(m.min(n));
        let inst = instance(m, n, r, seed);
        let p = leverage_scores(&truncated_svd(&inst.matrix, r).unwrap());
        let rows: f64 = (0..m).map(|i| p.row_mass(i)).sum();
        let cols: f64 = (0..n).map(|j| p.col_mass(j)).sum();
        prop_assert!((rows - r as f64).abs() <= 1e-8);
        prop_assert!((cols - r as f64).abs() <= 1e-8);
        let mut total = 0.0;
        for i in 0..m {
            for j in 0..n {
                let l = relaxed_score(&p, i, j).unwrap();
                prop_assert!((l - oracle_relaxed(&inst.u, &inst.v, i, j)).abs() <= 1e-10);
                prop_assert!(l + 1e-15 >= p.row_mass(i).max(p.col_mass(j)));
                total += l;
            }
        }
        let dof = ((m + n) * r - r * r) as f64;
        prop_assert!((total - dof).abs() <= 1e-6 * dof);
    }

    #[test]
    fn relaxed_is_dominated_by_leveraged(m in 2usize..30, n in 2usize..30, r in 1usize..4, c in 0.1f64..20.0, seed: u64) {
        let r = r.min(m.min(n));
        let p = leverage_scores(&truncated_svd(&instance(m, n, r, seed).matrix, r).unwrap());
        let relaxed = entry_probabilities(&p, &ProbabilityScheme::relaxed(c)).unwrap();
        let leveraged = entry_probabilities(&p, &ProbabilityScheme::leveraged(c)).unwrap();
        for (a, b) in relaxed.values().iter().zip(leveraged.values()) {
            prop_assert!(a <= b);
        }
        prop_assert!(expected_sample_size(&relaxed) <= expected_sample_size(&leveraged));
    }
}

#[test]
fn theorem_scheme_respects_floor() {
    let p = leverage_scores(&truncated_svd(&instance(10, 8, 2, 3).matrix, 2).unwrap());
    let s = ProbabilityScheme::theorem(1e-30, 10, 8);
    let t = entry_probabilities(&p, &s).unwrap();
    assert!(t.values().iter().all(|&v| v >= s.floor && v <= 1.0));
}
