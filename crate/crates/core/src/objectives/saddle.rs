use crate::error::{Error, Result};
use crate::numerics::{norm_sq, SymmetricMatrix};

use super::{Capabilities, Objective};

/// `f(w) = ½ Σ λ_i w_i² + (c₄/4)‖w‖⁴`.
///
/// The origin is stationary with Hessian `diag(λ)`; at least one `λ_i` is
/// negative, making it a strict saddle. The quartic term keeps `f` bounded
/// below.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSpec {
    eigenvalues: Vec<f64>,
    quartic: f64,
}

impl SaddleSpec {
    pub fn new(eigenvalues: Vec<f64>, quartic: f64) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::domain("saddle eigenvalues must be finite and non-empty"));
        }
        if !eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(Error::domain("a strict saddle needs at least one negative eigenvalue"));
        }
        if !(quartic > 0.0 && quartic.is_finite()) {
            return Err(Error::domain(format!("quartic coefficient must be > 0, got {quartic}")));
        }
        Ok(Self { eigenvalues, quartic })
    }

    /// `λ = (lambda_min, 1, …, 1)` in `dim` dimensions.
    pub fn single_negative(dim: usize, lambda_min: f64, quartic: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("saddle dimension must be at least 1"));
        }
        let mut eigenvalues = vec![1.0; dim];
        eigenvalues[0] = lambda_min;
        Self::new(eigenvalues, quartic)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn quartic(&self) -> f64 {
        self.quartic
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `−p (max|λ|)² / (4c₄)`, a lower bound on `f`.
    pub fn loss_lower_bound(&self) -> f64 {
        let m = self.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
        -(m * m) / (4.0 * self.quartic) * self.dim() as f64
    }
}

pub fn saddle_loss(spec: &SaddleSpec, w: &[f64]) -> f64 {
    assert_eq!(w.len(), spec.dim());
    let quad: f64 = spec.eigenvalues.iter().zip(w).map(|(l, x)| l * x * x).sum();
    let r2 = norm_sq(w);
    0.5 * quad + 0.25 * spec.quartic * r2 * r2
}

pub fn saddle_grad(spec: &SaddleSpec, w: &[f64], out: &mut [f64]) {
    assert_eq!(w.len(), spec.dim());
    let r2 = norm_sq(w);
    for ((o, l), x) in out.iter_mut().zip(&spec.eigenvalues).zip(w) {
        *o = l * x + spec.quartic * r2 * x;
    }
}

/// `diag(λ) + c₄(‖w‖² I + 2 w wᵀ)`.
pub fn saddle_hessian(spec: &SaddleSpec, w: &[f64]) -> SymmetricMatrix {
    assert_eq!(w.len(), spec.dim());
    let r2 = norm_sq(w);
    let c = spec.quartic;
    SymmetricMatrix::from_upper(spec.dim(), |i, j| {
        let mut v = 2.0 * c * w[i] * w[j];
        if i == j {
            v += spec.eigenvalues[i] + c * r2;
        }
        v
    })
    .expect("finite inputs give a finite Hessian")
}

/// [`SaddleSpec`] as a one-term objective, so minibatches are full batches.
#[derive(Debug, Clone)]
pub struct SaddleObjective {
    spec: SaddleSpec,
}

impl SaddleObjective {
    pub fn new(spec: SaddleSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &SaddleSpec {
        &self.spec
    }
}

impl Objective for SaddleObjective {
    fn name(&self) -> &str {
        "saddle"
    }

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn num_samples(&self) -> usize {
        1
    }

    fn sample_loss(&self, w: &[f64], _i: usize) -> f64 {
        saddle_loss(&self.spec, w)
    }

    fn sample_grad(&self, w: &[f64], _i: usize, out: &mut [f64]) {
        saddle_grad(&self.spec, w, out);
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            has_hessian: true,
            is_convex: false,
        }
    }

    fn loss(&self, w: &[f64]) -> f64 {
        saddle_loss(&self.spec, w)
    }

    fn hessian(&self, w: &[f64]) -> Option<SymmetricMatrix> {
        Some(saddle_hessian(&self.spec, w))
    }
}
