//! Truncated SGD and Noisy Truncated SGD.
//!
//! The crate is split the way the experiments use it:
//!
//! * [`numerics`]: dense vectors, small symmetric matrices, a seeded splittable
//!   RNG, a Jacobi eigensolver and a central-difference gradient oracle.
//! * [`truncation`]: energy-based gradient truncation, `g = g̃ + v`.
//! * [`optim`]: SGD / T-SGD / NT-SGD steps, schedules and full runs.
//! * [`objectives`]: a strict-saddle test function, logistic regression and a
//!   one-hidden-layer tanh MLP, all with analytic gradients.
//! * [`datasets`]: Gaussian blobs, IDX (MNIST) ingestion, neighbouring datasets.
//! * [`experiments`]: convergence, sparsity, saddle-escape, stable-rank and
//!   stability drivers plus CSV emission.

#![forbid(unsafe_code)]

pub mod datasets;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod objectives;
pub mod optim;
pub mod truncation;

pub use datasets::{Dataset, NeighborPair, Sample};
pub use error::{Error, IdxError, Result};
pub use numerics::{DenseVector, RngState, SymmetricMatrix};
pub use objectives::{
    Capabilities, Classifier, LogisticRegression, Mlp, Model, Objective, SaddleObjective, SaddleSpec,
};
pub use optim::{OptimizerConfig, RunRecord, RunStatus, StepMetrics, StepSchedule};
pub use truncation::{gradient_truncate, TruncationResult};
