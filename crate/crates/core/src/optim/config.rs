use crate::error::{Error, Result};

/// Step size `η_t` for update `t = 1, …, T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `η_t = η`.
    Constant(f64),
    /// `η_t = c / √T` for a fixed horizon `T`.
    InvSqrtHorizon(f64),
    /// `η_t = c / t`.
    InvT(f64),
}

impl StepSchedule {
    pub fn coefficient(&self) -> f64 {
        match *self {
            StepSchedule::Constant(c) | StepSchedule::InvSqrtHorizon(c) | StepSchedule::InvT(c) => c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.coefficient();
        if c > 0.0 && c.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("step size coefficient must be > 0, got {c}")))
        }
    }

    /// # Panics
    /// If `t == 0`; updates are numbered from 1.
    pub fn step_size(&self, t: usize, horizon: usize) -> f64 {
        assert!(t >= 1, "updates are numbered from 1");
        match *self {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::InvSqrtHorizon(c) => c / (horizon.max(1) as f64).sqrt(),
            StepSchedule::InvT(c) => c / t as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// ε², the fraction of squared gradient norm that may be discarded.
    pub cut_rate: f64,
    /// σ, the standard deviation of each injected noise coordinate.
    pub noise_sigma: f64,
    /// β ∈ [0, ½]; the noise is scaled by `η^{1/2+β}`.
    pub beta: f64,
    pub schedule: StepSchedule,
    pub batch_size: usize,
    /// Number of updates T.
    pub horizon: usize,
    pub seed: u64,
    pub record_every: usize,
    /// Keep `|g_i| ≥ κ` with a constant κ instead of the energy rule.
    pub fixed_threshold: Option<f64>,
    /// Store the iterate at every recorded step.
    pub keep_iterates: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            cut_rate: 0.1,
            noise_sigma: 1e-3,
            beta: 0.0,
            schedule: StepSchedule::Constant(0.1),
            batch_size: 100,
            horizon: 1000,
            seed: 0,
            record_every: 10,
            fixed_threshold: None,
            keep_iterates: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.cut_rate) {
            return Err(Error::domain(format!("cut_rate must lie in [0, 1], got {}", self.cut_rate)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::domain(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !(0.0..=0.5).contains(&self.beta) {
            return Err(Error::domain(format!("beta must lie in [0, 0.5], got {}", self.beta)));
        }
        self.schedule.validate()?;
        if self.batch_size == 0 {
            return Err(Error::domain("batch_size must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be at least 1"));
        }
        if let Some(k) = self.fixed_threshold {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::domain(format!("fixed_threshold must be > 0, got {k}")));
            }
        }
        Ok(())
    }

    pub fn step_size(&self, t: usize) -> f64 {
        self.schedule.step_size(t, self.horizon)
    }

    /// Exponent `½ + β` applied to the step size in the noise term.
    pub fn noise_exponent(&self) -> f64 {
        0.5 + self.beta
    }
}
