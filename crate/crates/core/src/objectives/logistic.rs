use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{dot, SymmetricMatrix};

use super::{Capabilities, Classifier, Objective};

/// `log(1 + e^{-m})` without overflow for large `|m|`.
fn softplus_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ℓ = log(1 + exp(−y wᵀx))` for `y ∈ {−1, +1}`.
pub fn logistic_loss(w: &[f64], x: &[f64], y: f64) -> f64 {
    softplus_neg(y * dot(w, x))
}

/// `∇ℓ = −y x σ(−y wᵀx)`, written into `out`.
pub fn logistic_grad(w: &[f64], x: &[f64], y: f64, out: &mut [f64]) {
    let coef = -y * sigmoid(-y * dot(w, x));
    for (o, xi) in out.iter_mut().zip(x) {
        *o = coef * xi;
    }
}

/// Binary logistic regression without intercept. Label 1 maps to `y = +1`,
/// label 0 to `y = −1`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    data: Dataset,
}

impl LogisticRegression {
    pub fn new(data: Dataset) -> Result<Self> {
        if data.num_classes() != 2 {
            return Err(Error::domain(format!(
                "logistic regression needs binary labels, dataset has {} classes",
                data.num_classes()
            )));
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn sign(label: usize) -> f64 {
        if label == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

impl Objective for LogisticRegression {
    fn name(&self) -> &str {
        "logistic"
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn num_samples(&self) -> usize {
        self.data.len()
    }

    fn sample_loss(&self, w: &[f64], i: usize) -> f64 {
        logistic_loss(w, self.data.features(i), Self::sign(self.data.label(i)))
    }

    fn sample_grad(&self, w: &[f64], i: usize, out: &mut [f64]) {
        logistic_grad(w, self.data.features(i), Self::sign(self.data.label(i)), out);
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            has_hessian: true,
            is_convex: true,
        }
    }

    fn hessian(&self, w: &[f64]) -> Option<SymmetricMatrix> {
        let d = self.dim();
        let n = self.data.len() as f64;
        let mut h = vec![0.0; d * d];
        for i in 0..self.data.len() {
            let x = self.data.features(i);
            let s = sigmoid(dot(w, x));
            let c = s * (1.0 - s) / n;
            for a in 0..d {
                for b in a..d {
                    h[a * d + b] += c * x[a] * x[b];
                }
            }
        }
        SymmetricMatrix::from_upper(d, |a, b| h[a * d + b]).ok()
    }
}

impl Classifier for LogisticRegression {
    fn predict(&self, w: &[f64], x: &[f64]) -> usize {
        usize::from(dot(w, x) > 0.0)
    }

    fn dataset_loss(&self, w: &[f64], data: &Dataset) -> f64 {
        (0..data.len())
            .map(|i| logistic_loss(w, data.features(i), Self::sign(data.label(i))))
            .sum::<f64>()
            / data.len() as f64
    }
}
