use crate::error::{Error, Result};
use crate::numerics::{DenseVector, RngState};
use crate::truncation::{gradient_truncate, threshold_truncate, TruncationResult};

use super::OptimizerConfig;

/// Supplies the noise vector `b_t` of an NT-SGD step.
pub trait NoiseSource {
    fn fill(&mut self, out: &mut [f64], sigma: f64);
}

impl NoiseSource for RngState {
    fn fill(&mut self, out: &mut [f64], sigma: f64) {
        self.fill_gaussian(out, sigma);
    }
}

/// A fixed noise vector, used verbatim regardless of σ.
#[derive(Debug, Clone)]
pub struct InjectedNoise(pub Vec<f64>);

impl NoiseSource for InjectedNoise {
    fn fill(&mut self, out: &mut [f64], _sigma: f64) {
        out.copy_from_slice(&self.0);
    }
}

/// Truncation selected by `cfg`: the energy rule, or a constant threshold.
pub fn truncate_with(cfg: &OptimizerConfig, g: &[f64]) -> Result<TruncationResult> {
    match cfg.fixed_threshold {
        Some(kappa) => threshold_truncate(g, kappa),
        None => gradient_truncate(g, cfg.cut_rate),
    }
}

/// In-place `w ← w − η g̃ + η^{1/2+β} b`. No noise is drawn when σ = 0.
pub(crate) fn apply_update(
    w: &mut [f64],
    truncated: &[f64],
    eta: f64,
    cfg: &OptimizerConfig,
    noise: &mut dyn NoiseSource,
    noise_buf: &mut [f64],
) {
    for (wi, gi) in w.iter_mut().zip(truncated) {
        *wi -= eta * gi;
    }
    if cfg.noise_sigma > 0.0 {
        noise.fill(noise_buf, cfg.noise_sigma);
        let scale = eta.powf(cfg.noise_exponent());
        for (wi, bi) in w.iter_mut().zip(noise_buf.iter()) {
            *wi += scale * bi;
        }
    }
}

fn check_step(w: &[f64], g: &[f64], eta: f64) -> Result<()> {
    if w.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: g.len(),
        });
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("step size must be > 0, got {eta}")));
    }
    Ok(())
}

/// One NT-SGD update from minibatch gradient `g`.
pub fn ntsgd_step(
    w: &[f64],
    g: &[f64],
    eta: f64,
    cfg: &OptimizerConfig,
    noise: &mut impl NoiseSource,
) -> Result<(DenseVector, TruncationResult)> {
    check_step(w, g, eta)?;
    let trunc = truncate_with(cfg, g)?;
    let mut next = w.to_vec();
    let mut buf = vec![0.0; w.len()];
    apply_update(&mut next, &trunc.truncated, eta, cfg, noise, &mut buf);
    Ok((DenseVector::from_vec_unchecked(next), trunc))
}

/// One T-SGD update: NT-SGD without noise.
pub fn tsgd_step(w: &[f64], g: &[f64], eta: f64, cut_rate: f64) -> Result<(DenseVector, TruncationResult)> {
    let cfg = OptimizerConfig {
        cut_rate,
        noise_sigma: 0.0,
        ..OptimizerConfig::default()
    };
    ntsgd_step(w, g, eta, &cfg, &mut InjectedNoise(Vec::new()))
}

/// Plain SGD, `w − η g`.
pub fn sgd_step(w: &[f64], g: &[f64], eta: f64) -> Result<DenseVector> {
    check_step(w, g, eta)?;
    Ok(DenseVector::from_vec_unchecked(
        w.iter().zip(g).map(|(wi, gi)| wi - eta * gi).collect(),
    ))
}
