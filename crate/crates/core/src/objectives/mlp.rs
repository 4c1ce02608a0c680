//! One-hidden-layer tanh network with softmax cross-entropy.
//!
//! Parameters are packed into one flat vector, in order:
//! `W₁` (`h × d`, row-major), `b₁` (`h`), `W₂` (`k × h`, row-major), `b₂` (`k`).

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{DenseVector, RngState};

use super::{Capabilities, Classifier, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpLayout {
    pub input: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl MlpLayout {
    pub fn new(input: usize, hidden: usize, classes: usize) -> Result<Self> {
        if input == 0 || hidden == 0 || classes < 2 {
            return Err(Error::domain(format!(
                "mlp layout needs input >= 1, hidden >= 1, classes >= 2 (got {input}, {hidden}, {classes})"
            )));
        }
        Ok(Self { input, hidden, classes })
    }

    pub fn len(&self) -> usize {
        self.hidden * self.input + self.hidden + self.classes * self.hidden + self.classes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn b1(&self) -> usize {
        self.hidden * self.input
    }

    fn w2(&self) -> usize {
        self.b1() + self.hidden
    }

    fn b2(&self) -> usize {
        self.w2() + self.classes * self.hidden
    }

    fn check(&self, w: &[f64], x: &[f64], label: usize) -> Result<()> {
        if w.len() != self.len() {
            return Err(Error::domain(format!(
                "parameter vector has {} entries, layout needs {}",
                w.len(),
                self.len()
            )));
        }
        if x.len() != self.input {
            return Err(Error::DimensionMismatch {
                expected: self.input,
                found: x.len(),
            });
        }
        if label >= self.classes {
            return Err(Error::domain(format!("label {label} out of range for {} classes", self.classes)));
        }
        Ok(())
    }

    /// Hidden activations and output logits.
    fn forward(&self, w: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (d, h, k) = (self.input, self.hidden, self.classes);
        let hidden: Vec<f64> = (0..h)
            .map(|j| {
                let row = &w[j * d..(j + 1) * d];
                let a = w[self.b1() + j] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                a.tanh()
            })
            .collect();
        let logits = (0..k)
            .map(|c| {
                let row = &w[self.w2() + c * h..self.w2() + (c + 1) * h];
                w[self.b2() + c] + row.iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        (hidden, logits)
    }

    fn loss_unchecked(&self, w: &[f64], x: &[f64], label: usize) -> f64 {
        let (_, logits) = self.forward(w, x);
        cross_entropy(&logits, label, None)
    }

    fn grad_unchecked(&self, w: &[f64], x: &[f64], label: usize, out: &mut [f64]) {
        let (d, h, k) = (self.input, self.hidden, self.classes);
        let (hidden, logits) = self.forward(w, x);
        let mut deltas = vec![0.0; k];
        cross_entropy(&logits, label, Some(&mut deltas));
        let mut d_hidden = vec![0.0; h];
        for (c, &delta) in deltas.iter().enumerate() {
            out[self.b2() + c] = delta;
            let w2_row = self.w2() + c * h;
            for j in 0..h {
                out[w2_row + j] = delta * hidden[j];
                d_hidden[j] += delta * w[w2_row + j];
            }
        }
        for j in 0..h {
            let da = d_hidden[j] * (1.0 - hidden[j] * hidden[j]);
            out[self.b1() + j] = da;
            for (o, xi) in out[j * d..(j + 1) * d].iter_mut().zip(x) {
                *o = da * xi;
            }
        }
    }
}

/// `−log softmax(z)_y`, written in terms of `d_c = z_c − z_y` so that
/// confidently correct predictions keep full relative precision. With
/// `deltas`, also writes `softmax(z) − e_y`, the true-class entry being minus
/// the sum of the others.
fn cross_entropy(logits: &[f64], label: usize, deltas: Option<&mut [f64]>) -> f64 {
    let zy = logits[label];
    let m = logits.iter().map(|z| z - zy).fold(0.0, f64::max);
    let others: f64 = logits
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != label)
        .map(|(_, z)| (z - zy - m).exp())
        .sum();
    // Σ_c exp(d_c − m), the true class contributing exp(−m).
    let total = others + (-m).exp();
    if let Some(out) = deltas {
        for (c, (o, z)) in out.iter_mut().zip(logits).enumerate() {
            *o = if c == label { -others / total } else { (z - zy - m).exp() / total };
        }
    }
    if m == 0.0 {
        others.ln_1p()
    } else {
        m + total.ln()
    }
}

pub fn mlp_loss(layout: &MlpLayout, w: &[f64], x: &[f64], label: usize) -> Result<f64> {
    layout.check(w, x, label)?;
    Ok(layout.loss_unchecked(w, x, label))
}

pub fn mlp_grad(layout: &MlpLayout, w: &[f64], x: &[f64], label: usize) -> Result<DenseVector> {
    layout.check(w, x, label)?;
    let mut out = vec![0.0; layout.len()];
    layout.grad_unchecked(w, x, label, &mut out);
    DenseVector::new(out)
}

#[derive(Debug, Clone)]
pub struct Mlp {
    data: Dataset,
    layout: MlpLayout,
}

impl Mlp {
    pub fn new(data: Dataset, hidden: usize) -> Result<Self> {
        let layout = MlpLayout::new(data.dim(), hidden, data.num_classes())?;
        Ok(Self { data, layout })
    }

    pub fn layout(&self) -> &MlpLayout {
        &self.layout
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Gaussian weights with variance `1/fan_in`, zero biases.
    pub fn init_params(&self, rng: &mut RngState) -> DenseVector {
        let l = &self.layout;
        let mut w = DenseVector::zeros(l.len());
        let s1 = 1.0 / (l.input as f64).sqrt();
        let s2 = 1.0 / (l.hidden as f64).sqrt();
        rng.fill_gaussian(&mut w[..l.b1()], s1);
        let (w2, b2) = (l.w2(), l.b2());
        rng.fill_gaussian(&mut w[w2..b2], s2);
        w
    }
}

impl Objective for Mlp {
    fn name(&self) -> &str {
        "mlp"
    }

    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn num_samples(&self) -> usize {
        self.data.len()
    }

    fn sample_loss(&self, w: &[f64], i: usize) -> f64 {
        assert_eq!(w.len(), self.layout.len());
        self.layout.loss_unchecked(w, self.data.features(i), self.data.label(i))
    }

    fn sample_grad(&self, w: &[f64], i: usize, out: &mut [f64]) {
        assert_eq!(w.len(), self.layout.len());
        self.layout.grad_unchecked(w, self.data.features(i), self.data.label(i), out);
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            has_hessian: false,
            is_convex: false,
        }
    }
}

impl Classifier for Mlp {
    fn predict(&self, w: &[f64], x: &[f64]) -> usize {
        let (_, logits) = self.layout.forward(w, x);
        // first maximum wins
        let mut best = 0;
        for (c, &v) in logits.iter().enumerate() {
            if v > logits[best] {
                best = c;
            }
        }
        best
    }

    fn dataset_loss(&self, w: &[f64], data: &Dataset) -> f64 {
        (0..data.len())
            .map(|i| self.layout.loss_unchecked(w, data.features(i), data.label(i)))
            .sum::<f64>()
            / data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_params(rng: &mut RngState, layout: &MlpLayout) -> Vec<f64> {
        (0..layout.len()).map(|_| rng.standard_normal()).collect()
    }

    #[test]
    fn saturated_cross_entropy_keeps_relative_precision() {
        let mut d = [0.0; 3];
        let l = cross_entropy(&[30.0, 0.0, -5.0], 0, Some(&mut d));
        let exact = ((-30.0f64).exp() + (-35.0f64).exp()).ln_1p();
        assert!((l - exact).abs() <= 1e-15 * exact);
        assert!((d[0] + d[1] + d[2]).abs() <= 1e-30);
        assert!(d[0] < 0.0);
        let wrong = cross_entropy(&[30.0, 0.0, -5.0], 1, None);
        assert!((wrong - 30.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_give_log_k() {
        let layout = MlpLayout::new(3, 4, 5).unwrap();
        let w = vec![0.0; layout.len()];
        let l = mlp_loss(&layout, &w, &[1.0, -2.0, 0.5], 3).unwrap();
        assert!((l - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn layout_errors() {
        let layout = MlpLayout::new(3, 4, 5).unwrap();
        assert_eq!(layout.len(), 12 + 4 + 20 + 5);
        assert!(mlp_loss(&layout, &[0.0; 10], &[0.0; 3], 0).is_err());
        assert!(mlp_grad(&layout, &vec![0.0; layout.len()], &[0.0; 2], 0).is_err());
        assert!(mlp_loss(&layout, &vec![0.0; layout.len()], &[0.0; 3], 5).is_err());
        assert!(MlpLayout::new(3, 0, 2).is_err());
    }

    #[test]
    fn hidden_unit_permutation_leaves_loss_unchanged() {
        let layout = MlpLayout::new(4, 6, 3).unwrap();
        let mut rng = RngState::new(21);
        let perm = [3, 0, 5, 1, 4, 2];
        for _ in 0..20 {
            let w = random_params(&mut rng, &layout);
            let x: Vec<f64> = (0..4).map(|_| rng.standard_normal()).collect();
            let mut p = w.clone();
            for (new, &old) in perm.iter().enumerate() {
                for i in 0..4 {
                    p[new * 4 + i] = w[old * 4 + i];
                }
                p[layout.b1() + new] = w[layout.b1() + old];
                for c in 0..3 {
                    p[layout.w2() + c * 6 + new] = w[layout.w2() + c * 6 + old];
                }
            }
            let a = mlp_loss(&layout, &w, &x, 1).unwrap();
            let b = mlp_loss(&layout, &p, &x, 1).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn scaling_true_class_row_lowers_loss() {
        let layout = MlpLayout::new(2, 3, 3).unwrap();
        let mut rng = RngState::new(5);
        let mut checked = 0;
        while checked < 20 {
            let w = random_params(&mut rng, &layout);
            let x = [rng.standard_normal(), rng.standard_normal()];
            let (_, logits) = layout.forward(&w, &x);
            let label = (0..3).max_by(|&a, &b| logits[a].total_cmp(&logits[b])).unwrap();
            if logits[label] <= 0.0 {
                continue;
            }
            let mut w2 = w.clone();
            for j in 0..3 {
                w2[layout.w2() + label * 3 + j] *= 2.0;
            }
            w2[layout.b2() + label] *= 2.0;
            assert!(mlp_loss(&layout, &w2, &x, label).unwrap() < mlp_loss(&layout, &w, &x, label).unwrap());
            checked += 1;
        }
    }
}
