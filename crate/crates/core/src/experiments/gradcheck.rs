use crate::error::Result;
use crate::numerics::{finite_diff_grad, relative_error, RngState, DEFAULT_FD_STEP};
use crate::objectives::Objective;

use super::{CsvTable, ToTable};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub objective: String,
    pub probes: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
}

impl GradCheck {
    pub fn passed(&self) -> bool {
        self.max_relative_error < self.tolerance
    }
}

#[derive(Debug, Clone, Default)]
pub struct GradCheckReport {
    pub checks: Vec<GradCheck>,
}

impl GradCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(GradCheck::passed)
    }
}

impl ToTable for GradCheckReport {
    fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["objective", "probes", "max_relative_error", "tolerance", "passed"]);
        for c in &self.checks {
            t.push(vec![
                c.objective.as_str().into(),
                c.probes.into(),
                c.max_relative_error.into(),
                c.tolerance.into(),
                c.passed().into(),
            ]);
        }
        t
    }
}

/// Compares per-sample analytic gradients against central differences at
/// `probes` random points `w ~ N(0, scale² I)` and random sample indices.
pub fn gradient_check(
    objective: &dyn Objective,
    probes: usize,
    scale: f64,
    seed: u64,
    tolerance: f64,
) -> Result<GradCheck> {
    let mut rng = RngState::new(seed).split("gradcheck");
    let p = objective.dim();
    let mut analytic = vec![0.0; p];
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let w: Vec<f64> = (0..p).map(|_| scale * rng.standard_normal()).collect();
        let i = rng.index(objective.num_samples());
        objective.sample_grad(&w, i, &mut analytic);
        let fd = finite_diff_grad(|x| objective.sample_loss(x, i), &w, DEFAULT_FD_STEP)?;
        worst = worst.max(relative_error(&analytic, &fd));
    }
    Ok(GradCheck {
        objective: objective.name().to_string(),
        probes,
        max_relative_error: worst,
        tolerance,
    })
}
