mod common;

use proptest::prelude::*;
use tsgd_core::gradient_truncate;
use tsgd_core::truncation::threshold_truncate;

fn gradient(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            4 => -1e3..1e3f64,
            1 => Just(0.0),
            1 => prop::sample::select(vec![1.0, -1.0, 0.5, -0.5]),
        ],
        1..=max_dim,
    )
}

fn cut_rate() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 1 => Just(1.0), 6 => 0.0..=1.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn decomposition_is_exact(g in gradient(256), e in cut_rate()) {
        let r = gradient_truncate(&g, e).unwrap();
        for ((t, v), x) in r.truncated.iter().zip(r.residual.iter()).zip(&g) {
            prop_assert_eq!(t + v, *x);
            prop_assert!(*t == 0.0 || *v == 0.0);
        }
        prop_assert_eq!(r.kept, r.kept_mask.iter().filter(|&&k| k).count());
        prop_assert_eq!(r.sparsity, 1.0 - r.kept as f64 / g.len() as f64);
    }

    #[test]
    fn energy_bound_and_minimality(g in gradient(256), e in cut_rate()) {
        let r = gradient_truncate(&g, e).unwrap();
        let total = common::sorted_energy(&g, &vec![true; g.len()]);
        let kept = common::sorted_energy(&g, &r.kept_mask);
        prop_assert!(kept >= (1.0 - e) * total);
        if e > 0.0 && r.kept > 0 {
            let drop = (0..g.len())
                .filter(|&i| r.kept_mask[i])
                .min_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs()).then(b.cmp(&a)))
                .unwrap();
            let mut smaller = r.kept_mask.clone();
            smaller[drop] = false;
            prop_assert!(common::sorted_energy(&g, &smaller) < (1.0 - e) * total);
        }
    }

    #[test]
    fn kept_magnitudes_dominate(g in gradient(256), e in cut_rate()) {
        let r = gradient_truncate(&g, e).unwrap();
        let kept = g.iter().zip(&r.kept_mask).filter(|(_, &k)| k).map(|(x, _)| x.abs());
        let dropped = g.iter().zip(&r.kept_mask).filter(|(_, &k)| !k).map(|(x, _)| x.abs());
        let min_kept = kept.fold(f64::INFINITY, f64::min);
        prop_assert!(dropped.fold(0.0, f64::max) <= min_kept);
        prop_assert_eq!(r.threshold, (r.kept > 0).then_some(min_kept));
    }

    #[test]
    fn matches_exhaustive_oracle(g in gradient(10), e in cut_rate()) {
        let r = gradient_truncate(&g, e).unwrap();
        let (k, masks) = common::exhaustive_min_masks(&g, e);
        if g.iter().all(|x| *x == 0.0) {
            prop_assert_eq!(r.kept, 0);
        } else {
            prop_assert_eq!(r.kept, k);
            prop_assert!(masks.contains(&r.kept_mask));
        }
    }

    #[test]
    fn keep_sets_nest_as_cut_rate_grows(g in gradient(128), a in cut_rate(), b in cut_rate()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = gradient_truncate(&g, hi).unwrap();
        let large = gradient_truncate(&g, lo).unwrap();
        for (s, l) in small.kept_mask.iter().zip(&large.kept_mask) {
            prop_assert!(!s || *l);
        }
        prop_assert!(small.sparsity >= large.sparsity);
    }

    #[test]
    fn scale_invariant_keep_set(g in gradient(64), e in 0.01..0.99f64, s in prop::sample::select(vec![0.25, 2.0, 1024.0])) {
        let scaled: Vec<f64> = g.iter().map(|x| x * s).collect();
        prop_assert_eq!(gradient_truncate(&g, e).unwrap().kept_mask, gradient_truncate(&scaled, e).unwrap().kept_mask);
    }

    #[test]
    fn fixed_threshold_keeps_large_coordinates(g in gradient(64), kappa in 1e-3..10.0f64) {
        let r = threshold_truncate(&g, kappa).unwrap();
        for (x, &k) in g.iter().zip(&r.kept_mask) {
            prop_assert_eq!(k, x.abs() >= kappa);
        }
    }
}

#[test]
fn full_cut_rate_keeps_nothing() {
    let r = gradient_truncate(&[1.0, -2.0, 3.0], 1.0).unwrap();
    assert_eq!(r.kept, 0);
    assert_eq!(r.sparsity, 1.0);
    assert_eq!(r.threshold, None);
    assert_eq!(r.residual.as_slice(), &[1.0, -2.0, 3.0]);
}

#[test]
fn one_dominant_coordinate() {
    let mut g = vec![1e-3; 100];
    g[37] = 10.0;
    let r = gradient_truncate(&g, 0.01).unwrap();
    assert_eq!(r.kept, 1);
    assert!(r.kept_mask[37]);
    assert_eq!(r.threshold, Some(10.0));
}
