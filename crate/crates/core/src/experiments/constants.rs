use crate::error::{Error, Result};
use crate::numerics::{norm, DenseVector, RngState};
use crate::objectives::Objective;

use super::{CsvTable, ToTable};

/// Constants that are configured rather than measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryInputs {
    /// Hessian-Lipschitz constant ρ.
    pub rho: f64,
    /// Curvature parameter γ; the saddle condition is `λ_min ≤ −√(ργ)`.
    pub gamma: f64,
    /// Target loss decrease F.
    pub loss_drop: f64,
    pub noise_sigma: f64,
    /// Uniform loss bound C.
    pub loss_bound: f64,
}

impl Default for TheoryInputs {
    fn default() -> Self {
        Self {
            rho: 1.0,
            gamma: 1.0,
            loss_drop: 0.1,
            noise_sigma: 0.0,
            loss_bound: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConstants {
    /// Largest per-sample gradient norm seen along the trajectory.
    pub g_hat: f64,
    /// Largest `‖∇ℒ(a) − ∇ℒ(b)‖ / ‖a − b‖` over random probe pairs.
    pub l_hat: f64,
    pub rho: f64,
    pub gamma: f64,
    pub loss_drop: f64,
    /// Total noise energy `R = p σ²`.
    pub noise_energy: f64,
    pub loss_bound: f64,
}

impl ToTable for TheoryConstants {
    fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["g_hat", "l_hat", "rho", "gamma", "loss_drop", "noise_energy", "loss_bound"]);
        t.push(vec![
            self.g_hat.into(),
            self.l_hat.into(),
            self.rho.into(),
            self.gamma.into(),
            self.loss_drop.into(),
            self.noise_energy.into(),
            self.loss_bound.into(),
        ]);
        t
    }
}

/// Empirical `G` and `L` along `trajectory`.
///
/// `L` is probed with `probe_pairs` pairs of points drawn uniformly from the
/// ball centred at the trajectory mean whose radius is the larger of 1 and
/// the trajectory's maximum distance from that centre.
pub fn estimate_constants(
    objective: &(impl Objective + ?Sized),
    trajectory: &[DenseVector],
    inputs: &TheoryInputs,
    probe_pairs: usize,
    seed: u64,
) -> Result<TheoryConstants> {
    let first = trajectory
        .first()
        .ok_or_else(|| Error::domain("trajectory must contain at least one iterate"))?;
    let p = first.dim();
    if let Some(w) = trajectory.iter().find(|w| w.dim() != p || !w.is_finite()) {
        return Err(Error::domain(format!(
            "trajectory iterates must be finite with dimension {p} (found dimension {})",
            w.dim()
        )));
    }

    let mut g_hat = 0.0_f64;
    let mut buf = vec![0.0; p];
    for w in trajectory {
        for i in 0..objective.num_samples() {
            objective.sample_grad(w, i, &mut buf);
            g_hat = g_hat.max(norm(&buf));
        }
    }

    let mut center = vec![0.0; p];
    for w in trajectory {
        center.iter_mut().zip(w.iter()).for_each(|(c, x)| *c += x);
    }
    center.iter_mut().for_each(|c| *c /= trajectory.len() as f64);
    let radius = trajectory
        .iter()
        .map(|w| w.distance(&center))
        .fold(1.0_f64, f64::max);

    let mut rng = RngState::new(seed).split("probes");
    let mut draw = || {
        let mut dir: Vec<f64> = (0..p).map(|_| rng.standard_normal()).collect();
        let n = norm(&dir).max(f64::MIN_POSITIVE);
        let r = radius * rng.uniform().powf(1.0 / p as f64);
        dir.iter_mut().zip(&center).for_each(|(d, c)| *d = c + *d * r / n);
        dir
    };
    let mut l_hat = 0.0_f64;
    for _ in 0..probe_pairs {
        let (a, b) = (draw(), draw());
        let dist = norm(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>());
        if dist == 0.0 {
            continue;
        }
        let ga = objective.grad(&a);
        let gb = objective.grad(&b);
        l_hat = l_hat.max(ga.distance(&gb) / dist);
    }

    Ok(TheoryConstants {
        g_hat,
        l_hat,
        rho: inputs.rho,
        gamma: inputs.gamma,
        loss_drop: inputs.loss_drop,
        noise_energy: p as f64 * inputs.noise_sigma * inputs.noise_sigma,
        loss_bound: inputs.loss_bound,
    })
}
