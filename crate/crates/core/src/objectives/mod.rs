//! Differentiable empirical-risk objectives `ℒ_S(w) = (1/n) Σ ℓ(w, z_i)`.

mod logistic;
mod mlp;
mod saddle;

pub use logistic::{logistic_grad, logistic_loss, LogisticRegression};
pub use mlp::{mlp_grad, mlp_loss, Mlp, MlpLayout};
pub use saddle::{saddle_grad, saddle_hessian, saddle_loss, SaddleObjective, SaddleSpec};

use crate::numerics::{DenseVector, SymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub has_hessian: bool,
    pub is_convex: bool,
}

/// A finite-sum objective with per-sample analytic gradients.
///
/// Implementations panic when handed a parameter slice of the wrong length;
/// the optimizer validates dimensions before iterating.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Number of terms in the finite sum. Data-free objectives report 1.
    fn num_samples(&self) -> usize;

    fn sample_loss(&self, w: &[f64], i: usize) -> f64;

    /// Writes `∇ℓ(w, z_i)` into `out`, overwriting it.
    fn sample_grad(&self, w: &[f64], i: usize, out: &mut [f64]);

    fn capabilities(&self) -> Capabilities;

    fn loss(&self, w: &[f64]) -> f64 {
        let n = self.num_samples();
        (0..n).map(|i| self.sample_loss(w, i)).sum::<f64>() / n as f64
    }

    fn grad(&self, w: &[f64]) -> DenseVector {
        let n = self.num_samples();
        let mut acc = DenseVector::zeros(self.dim());
        let mut tmp = vec![0.0; self.dim()];
        for i in 0..n {
            self.sample_grad(w, i, &mut tmp);
            acc.iter_mut().zip(&tmp).for_each(|(a, t)| *a += t);
        }
        acc.scale(1.0 / n as f64);
        acc
    }

    fn hessian(&self, _w: &[f64]) -> Option<SymmetricMatrix> {
        None
    }
}

/// Held-out evaluation for classifiers.
pub trait Classifier {
    fn predict(&self, w: &[f64], x: &[f64]) -> usize;

    fn accuracy(&self, w: &[f64], data: &crate::Dataset) -> f64 {
        let correct = (0..data.len())
            .filter(|&i| self.predict(w, data.features(i)) == data.label(i))
            .count();
        correct as f64 / data.len() as f64
    }

    /// Mean loss over an arbitrary dataset with the same layout.
    fn dataset_loss(&self, w: &[f64], data: &crate::Dataset) -> f64;
}

/// A classifier that can also pick its own starting point.
pub trait Model: Objective + Classifier {
    fn initial_point(&self, seed: u64) -> DenseVector;
}

impl Model for LogisticRegression {
    /// The origin.
    fn initial_point(&self, _seed: u64) -> DenseVector {
        DenseVector::zeros(self.dim())
    }
}

impl Model for Mlp {
    /// [`Mlp::init_params`] on the `"init"` child of `seed`.
    fn initial_point(&self, seed: u64) -> DenseVector {
        self.init_params(&mut crate::numerics::RngState::new(seed).split("init"))
    }
}
