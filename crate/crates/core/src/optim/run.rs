use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::numerics::{DenseVector, RngState};
use crate::objectives::Objective;
use crate::truncation::TruncationResult;

use super::step::{apply_update, truncate_with};
use super::OptimizerConfig;

/// Metrics of iterate `w_t`. `sparsity` and `threshold` describe the
/// truncation applied in update `t` and are absent for `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub t: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub sparsity: Option<f64>,
    pub threshold: Option<f64>,
    pub param_norm: f64,
}

impl StepMetrics {
    pub fn measure(objective: &(impl Objective + ?Sized), w: &[f64], t: usize, trunc: Option<&TruncationResult>) -> Self {
        Self {
            t,
            loss: objective.loss(w),
            grad_norm: objective.grad(w).norm(),
            sparsity: trunc.map(|r| r.sparsity),
            threshold: trunc.and_then(|r| r.threshold),
            param_norm: crate::numerics::norm(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// A parameter or the recorded loss became non-finite after update `t`.
    Diverged { t: usize },
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: OptimizerConfig,
    pub initial: StepMetrics,
    /// Recorded steps, `t` strictly increasing and ≥ 1.
    pub steps: Vec<StepMetrics>,
    pub final_iterate: DenseVector,
    /// `w_J` with `J` uniform on `1..=T` (`w₀` when `T = 0`).
    pub sampled_iterate: DenseVector,
    pub sampled_index: usize,
    /// `(t, w_t)` for `t = 0` and each recorded step, if requested.
    pub iterates: Vec<(usize, DenseVector)>,
    pub status: RunStatus,
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    pub fn final_loss(&self) -> f64 {
        self.steps.last().unwrap_or(&self.initial).loss
    }

    /// Mean truncation sparsity over recorded steps.
    pub fn mean_sparsity(&self) -> Option<f64> {
        let v: Vec<f64> = self.steps.iter().filter_map(|s| s.sparsity).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// `min_t ‖∇ℒ_S(w_t)‖²` over recorded steps, or the initial value if
    /// nothing was recorded.
    pub fn min_grad_norm_sq(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.grad_norm * s.grad_norm)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
            .unwrap_or(self.initial.grad_norm * self.initial.grad_norm)
    }
}

/// Stepwise NT-SGD over an objective.
///
/// Randomness comes from three children of `RngState::new(cfg.seed)`:
/// `"batch"` draws minibatch indices, `"noise"` draws `b_t`, and `"sample"`
/// drives the reservoir choice of `J`. Two optimizers with the same seed
/// therefore see identical index and noise streams, whatever their data.
pub struct Optimizer<'a, O: Objective + ?Sized> {
    objective: &'a O,
    cfg: OptimizerConfig,
    w: DenseVector,
    t: usize,
    batch_rng: RngState,
    noise_rng: RngState,
    sample_rng: RngState,
    batch: Vec<usize>,
    grad: Vec<f64>,
    scratch: Vec<f64>,
    noise_buf: Vec<f64>,
    sampled: DenseVector,
    sampled_index: usize,
    last: Option<TruncationResult>,
}

impl<'a, O: Objective + ?Sized> Optimizer<'a, O> {
    pub fn new(objective: &'a O, init: DenseVector, cfg: OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        if init.dim() != objective.dim() {
            return Err(Error::DimensionMismatch {
                expected: objective.dim(),
                found: init.dim(),
            });
        }
        if cfg.batch_size > objective.num_samples() {
            return Err(Error::domain(format!(
                "batch_size {} exceeds the {} samples of objective {}",
                cfg.batch_size,
                objective.num_samples(),
                objective.name()
            )));
        }
        let root = RngState::new(cfg.seed);
        let p = init.dim();
        Ok(Self {
            objective,
            batch_rng: root.split("batch"),
            noise_rng: root.split("noise"),
            sample_rng: root.split("sample"),
            batch: Vec::with_capacity(cfg.batch_size),
            grad: vec![0.0; p],
            scratch: vec![0.0; p],
            noise_buf: vec![0.0; p],
            sampled: init.clone(),
            sampled_index: 0,
            w: init,
            t: 0,
            last: None,
            cfg,
        })
    }

    pub fn iterate(&self) -> &DenseVector {
        &self.w
    }

    /// Number of updates performed so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    /// Indices of the minibatch used by the latest update.
    pub fn last_batch(&self) -> &[usize] {
        &self.batch
    }

    pub fn last_truncation(&self) -> Option<&TruncationResult> {
        self.last.as_ref()
    }

    pub fn sampled(&self) -> (usize, &DenseVector) {
        (self.sampled_index, &self.sampled)
    }

    /// `(1/m) Σ_{i∈B} ∇ℓ(w, z_i)`: per-sample gradients are summed in batch
    /// order, then divided by `m`.
    fn minibatch_grad(&mut self) {
        let n = self.objective.num_samples();
        self.batch.clear();
        for _ in 0..self.cfg.batch_size {
            self.batch.push(self.batch_rng.index(n));
        }
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        for &i in &self.batch {
            self.objective.sample_grad(&self.w, i, &mut self.scratch);
            for (g, s) in self.grad.iter_mut().zip(&self.scratch) {
                *g += s;
            }
        }
        let m = self.cfg.batch_size as f64;
        self.grad.iter_mut().for_each(|g| *g /= m);
    }

    /// Performs update `t + 1`.
    pub fn step(&mut self) -> Result<&TruncationResult> {
        self.minibatch_grad();
        let t = self.t + 1;
        let eta = self.cfg.step_size(t);
        let trunc = truncate_with(&self.cfg, &self.grad).map_err(|e| match e {
            Error::Domain(msg) if self.grad.iter().any(|g| !g.is_finite()) => {
                Error::NonFinite(format!("update {t}: {msg}"))
            }
            other => other,
        })?;
        apply_update(
            &mut self.w,
            &trunc.truncated,
            eta,
            &self.cfg,
            &mut self.noise_rng,
            &mut self.noise_buf,
        );
        self.t = t;
        if self.sample_rng.index(t) == 0 {
            self.sampled.copy_from_slice(&self.w);
            self.sampled_index = t;
        }
        Ok(self.last.insert(trunc))
    }
}

/// Runs `cfg.horizon` updates from `init`, recording metrics at every
/// multiple of `cfg.record_every` and at `T`.
///
/// Divergence (a non-finite gradient, parameter or recorded loss) stops the
/// run early and is reported through [`RunStatus::Diverged`].
pub fn run(objective: &(impl Objective + ?Sized), init: DenseVector, cfg: &OptimizerConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let mut opt = Optimizer::new(objective, init.clone(), cfg.clone())?;
    let initial = StepMetrics::measure(objective, &init, 0, None);
    let mut iterates = Vec::new();
    if cfg.keep_iterates {
        iterates.push((0, init));
    }
    let mut steps = Vec::new();
    let mut status = RunStatus::Completed;

    for t in 1..=cfg.horizon {
        match opt.step() {
            Ok(_) => {}
            Err(Error::NonFinite(_)) => {
                status = RunStatus::Diverged { t };
                break;
            }
            Err(e) => return Err(e),
        }
        if !opt.iterate().is_finite() {
            status = RunStatus::Diverged { t };
            break;
        }
        if t % cfg.record_every == 0 || t == cfg.horizon {
            let m = StepMetrics::measure(objective, opt.iterate(), t, opt.last_truncation());
            let finite = m.loss.is_finite() && m.grad_norm.is_finite();
            steps.push(m);
            if !finite {
                status = RunStatus::Diverged { t };
                break;
            }
            if cfg.keep_iterates {
                iterates.push((t, opt.iterate().clone()));
            }
        }
    }

    let (sampled_index, sampled) = opt.sampled();
    Ok(RunRecord {
        config: cfg.clone(),
        initial,
        steps,
        sampled_index,
        sampled_iterate: sampled.clone(),
        final_iterate: opt.iterate().clone(),
        iterates,
        status,
        wall_time: start.elapsed(),
    })
}
