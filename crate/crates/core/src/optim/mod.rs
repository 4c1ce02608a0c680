//! SGD, Truncated SGD and Noisy Truncated SGD.
//!
//! One update is
//!
//! ```text
//! w_{t+1} = w_t − η_t g̃_t + η_t^{1/2+β} b_t,   b_t ~ N(0, σ² I)
//! ```
//!
//! where `g̃_t` is the truncated minibatch gradient. `σ = 0` gives T-SGD and
//! additionally `ε² = 0` gives plain SGD, bit for bit.

mod config;
mod run;
mod step;

pub use config::{OptimizerConfig, StepSchedule};
pub use run::{run, Optimizer, RunRecord, RunStatus, StepMetrics};
pub use step::{ntsgd_step, sgd_step, truncate_with, tsgd_step, InjectedNoise, NoiseSource};
