use proptest::prelude::*;
use tsgd_core::datasets::synth_blobs;
use tsgd_core::experiments::gradient_check;
use tsgd_core::numerics::{finite_diff_grad, relative_error, RngState};
use tsgd_core::{Classifier, LogisticRegression, Mlp, Model, Objective, SaddleObjective, SaddleSpec};

fn logistic() -> LogisticRegression {
    LogisticRegression::new(synth_blobs(&mut RngState::new(1), 80, 5, 2.0, 2).unwrap()).unwrap()
}

fn mlp() -> Mlp {
    Mlp::new(synth_blobs(&mut RngState::new(2), 60, 6, 2.5, 3).unwrap(), 7).unwrap()
}

fn saddle() -> SaddleObjective {
    SaddleObjective::new(SaddleSpec::new(vec![-2.0, -0.5, 1.0, 3.0], 0.7).unwrap())
}

#[test]
fn shipped_objectives_pass_the_gradient_check() {
    for obj in [&saddle() as &dyn Objective, &logistic(), &mlp()] {
        let c = gradient_check(obj, 100, 1.0, 3, 1e-5).unwrap();
        assert!(c.passed(), "{} {}", c.objective, c.max_relative_error);
    }
}

#[test]
fn full_gradient_matches_finite_differences_of_full_loss() {
    for obj in [&saddle() as &dyn Objective, &logistic(), &mlp()] {
        let mut rng = RngState::new(4);
        let w: Vec<f64> = (0..obj.dim()).map(|_| 0.5 * rng.standard_normal()).collect();
        let fd = finite_diff_grad(|x| obj.loss(x), &w, 1e-5).unwrap();
        assert!(relative_error(&obj.grad(&w), &fd) < 1e-6, "{}", obj.name());
    }
}

#[test]
fn analytic_hessians_match_finite_differences_of_the_gradient() {
    for obj in [&saddle() as &dyn Objective, &logistic()] {
        let p = obj.dim();
        let mut rng = RngState::new(5);
        let w: Vec<f64> = (0..p).map(|_| 0.5 * rng.standard_normal()).collect();
        let h = obj.hessian(&w).expect("hessian");
        for j in 0..p {
            let col = finite_diff_grad(|x| obj.grad(x)[j], &w, 1e-5).unwrap();
            let analytic: Vec<f64> = (0..p).map(|i| h.get(i, j)).collect();
            assert!(relative_error(&analytic, &col) < 1e-6, "{} column {j}", obj.name());
        }
    }
}

#[test]
fn saddle_origin_is_stationary_with_diagonal_hessian() {
    let s = saddle();
    let z = vec![0.0; 4];
    assert!(s.grad(&z).iter().all(|&g| g == 0.0));
    let h = s.hessian(&z).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(h.get(i, j), if i == j { s.spec().eigenvalues()[i] } else { 0.0 });
        }
    }
}

#[test]
fn mlp_initialisation_is_seeded() {
    let m = mlp();
    assert_eq!(m.initial_point(3), m.initial_point(3));
    assert_ne!(m.initial_point(3), m.initial_point(4));
    assert_eq!(logistic().initial_point(9).as_slice(), &[0.0; 5]);
}

#[test]
fn accuracy_is_a_fraction() {
    let m = mlp();
    let w = m.initial_point(0);
    let a = m.accuracy(&w, m.data());
    assert!((0.0..=1.0).contains(&a));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn saddle_loss_is_bounded_below(w in prop::collection::vec(-5.0..5.0f64, 4)) {
        let s = saddle();
        prop_assert!(s.loss(&w) >= s.spec().loss_lower_bound());
    }

    #[test]
    fn logistic_loss_is_positive_and_finite(w in prop::collection::vec(-1e3..1e3f64, 5)) {
        let l = logistic();
        let v = l.loss(&w);
        prop_assert!(v.is_finite() && v >= 0.0);
        prop_assert!(l.grad(&w).is_finite());
    }
}
