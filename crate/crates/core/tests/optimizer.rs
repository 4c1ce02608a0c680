use proptest::prelude::*;
use tsgd_core::datasets::{synth_blobs, Dataset};
use tsgd_core::experiments::ToTable;
use tsgd_core::numerics::RngState;
use tsgd_core::optim::{ntsgd_step, run, sgd_step, tsgd_step, InjectedNoise, Optimizer};
use tsgd_core::{DenseVector, Error, LogisticRegression, Objective, OptimizerConfig, RunStatus, SaddleObjective, SaddleSpec, StepSchedule};

fn logistic(n: usize, d: usize, seed: u64) -> LogisticRegression {
    LogisticRegression::new(synth_blobs(&mut RngState::new(seed), n, d, 2.0, 2).unwrap()).unwrap()
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig {
        batch_size: 8,
        horizon: 200,
        ..OptimizerConfig::default()
    }
}

#[test]
fn zero_horizon_records_only_the_initial_state() {
    let obj = logistic(50, 3, 0);
    let rec = run(&obj, DenseVector::zeros(3), &OptimizerConfig { horizon: 0, ..cfg() }).unwrap();
    assert!(rec.steps.is_empty());
    assert_eq!(rec.final_iterate.as_slice(), &[0.0; 3]);
    assert_eq!(rec.sampled_index, 0);
    assert_eq!(rec.to_table().rows.len(), 1);
    assert_eq!(rec.status, RunStatus::Completed);
}

#[test]
fn records_multiples_and_the_horizon() {
    let obj = logistic(50, 3, 0);
    let rec = run(&obj, DenseVector::zeros(3), &OptimizerConfig { horizon: 25, record_every: 10, ..cfg() }).unwrap();
    let ts: Vec<usize> = rec.steps.iter().map(|s| s.t).collect();
    assert_eq!(ts, vec![10, 20, 25]);
}

#[test]
fn identical_seeds_give_identical_runs() {
    let obj = logistic(80, 4, 1);
    let a = run(&obj, DenseVector::zeros(4), &cfg()).unwrap();
    let b = run(&obj, DenseVector::zeros(4), &cfg()).unwrap();
    assert_eq!(a.final_iterate, b.final_iterate);
    assert_eq!(a.steps, b.steps);
    let c = run(&obj, DenseVector::zeros(4), &OptimizerConfig { seed: 1, ..cfg() }).unwrap();
    assert_ne!(a.final_iterate, c.final_iterate);
}

#[test]
fn full_cut_rate_without_noise_never_moves() {
    let obj = logistic(40, 3, 2);
    let w0 = DenseVector::new(vec![0.3, -0.2, 0.1]).unwrap();
    let rec = run(&obj, w0.clone(), &OptimizerConfig { cut_rate: 1.0, noise_sigma: 0.0, ..cfg() }).unwrap();
    assert_eq!(rec.final_iterate, w0);
    assert!(rec.steps.iter().all(|s| s.sparsity == Some(1.0)));
}

#[test]
fn small_steps_decrease_the_loss_on_a_single_sample() {
    // n = 1 makes every minibatch gradient the full gradient.
    let data = Dataset::from_flat(4, vec![0.8, -1.2, 0.3, 2.0], vec![1], 2).unwrap();
    let obj = LogisticRegression::new(data).unwrap();
    let w0 = DenseVector::new(vec![-1.0, 0.5, 0.2, -0.3]).unwrap();
    let mut opt = Optimizer::new(
        &obj,
        w0,
        OptimizerConfig { batch_size: 1, noise_sigma: 0.0, cut_rate: 0.3, schedule: StepSchedule::Constant(0.05), ..cfg() },
    )
    .unwrap();
    let mut prev = obj.loss(opt.iterate());
    for _ in 0..50 {
        opt.step().unwrap();
        let now = obj.loss(opt.iterate());
        assert!(now <= prev, "{now} > {prev}");
        prev = now;
    }
}

#[test]
fn sampled_index_is_roughly_uniform() {
    let obj = logistic(20, 2, 4);
    let horizon = 10;
    let mut counts = [0usize; 11];
    for seed in 0..4000 {
        let rec = run(&obj, DenseVector::zeros(2), &OptimizerConfig { horizon, seed, batch_size: 1, ..cfg() }).unwrap();
        counts[rec.sampled_index] += 1;
    }
    assert_eq!(counts[0], 0);
    for &c in &counts[1..] {
        assert!((300..500).contains(&c), "{counts:?}");
    }
}

#[test]
fn divergence_is_reported_not_raised() {
    let spec = SaddleSpec::single_negative(3, -1.0, 1.0).unwrap();
    let obj = SaddleObjective::new(spec);
    let w0 = DenseVector::new(vec![5.0, 5.0, 5.0]).unwrap();
    let rec = run(&obj, w0, &OptimizerConfig { batch_size: 1, schedule: StepSchedule::Constant(10.0), ..cfg() }).unwrap();
    assert!(matches!(rec.status, RunStatus::Diverged { .. }));
}

#[test]
fn batch_larger_than_data_is_rejected() {
    let obj = logistic(5, 2, 0);
    let err = run(&obj, DenseVector::zeros(2), &cfg()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    let err = run(&obj, DenseVector::zeros(3), &OptimizerConfig { batch_size: 1, ..cfg() }).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
}

#[test]
fn inv_t_schedule_counts_from_one() {
    let s = StepSchedule::InvT(1.0);
    assert_eq!(s.step_size(1, 10), 1.0);
    assert_eq!(s.step_size(4, 10), 0.25);
    assert_eq!(StepSchedule::InvSqrtHorizon(2.0).step_size(7, 100), 0.2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zero_cut_rate_zero_noise_is_sgd(
        w in prop::collection::vec(-10.0..10.0f64, 1..32),
        seed in any::<u64>(),
        eta in 1e-3..1.0f64,
    ) {
        let mut rng = RngState::new(seed);
        let g: Vec<f64> = w.iter().map(|_| rng.standard_normal()).collect();
        let (a, _) = tsgd_step(&w, &g, eta, 0.0).unwrap();
        prop_assert_eq!(a, sgd_step(&w, &g, eta).unwrap());
    }

    #[test]
    fn update_identity_with_injected_noise(
        w in prop::collection::vec(-10.0..10.0f64, 1..32),
        seed in any::<u64>(),
        e in 0.0..=1.0f64,
        beta in 0.0..=0.5f64,
        eta in 1e-3..1.0f64,
    ) {
        let mut rng = RngState::new(seed);
        let g: Vec<f64> = w.iter().map(|_| rng.standard_normal()).collect();
        let b: Vec<f64> = w.iter().map(|_| rng.standard_normal()).collect();
        let cfg = OptimizerConfig { cut_rate: e, beta, noise_sigma: 1.0, ..OptimizerConfig::default() };
        let (next, trunc) = ntsgd_step(&w, &g, eta, &cfg, &mut InjectedNoise(b.clone())).unwrap();
        let scale = eta.powf(0.5 + beta);
        for i in 0..w.len() {
            let expected = w[i] - eta * trunc.truncated[i] + scale * b[i];
            prop_assert!((next[i] - expected).abs() <= 1e-14 * (1.0 + expected.abs()));
        }
    }
}
