use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::objectives::Objective;
use crate::optim::{run, OptimizerConfig, StepSchedule};

use super::{mean, CsvTable, SweepResult, ToTable};

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonSummary {
    pub horizon: usize,
    /// Mean of `‖∇ℒ_S(w_J)‖²` over non-diverged seeds.
    pub mean_sampled_grad_sq: f64,
    /// Mean of `min_t ‖∇ℒ_S(w_t)‖²` over non-diverged seeds.
    pub mean_min_grad_sq: f64,
    pub runs: usize,
    pub diverged: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Columns: `horizon, seed, step_size, sampled_index, sampled_grad_sq,
    /// min_grad_sq, final_loss, diverged`.
    pub result: SweepResult,
    pub horizons: Vec<HorizonSummary>,
    /// Least-squares slope of `ln(mean_min_grad_sq)` against `ln T`;
    /// `None` with fewer than two usable horizons.
    pub slope_min: Option<f64>,
    pub slope_sampled: Option<f64>,
}

impl ConvergenceReport {
    /// Columns: `horizon, runs, diverged, mean_sampled_grad_sq, mean_min_grad_sq`.
    pub fn summary_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["horizon", "runs", "diverged", "mean_sampled_grad_sq", "mean_min_grad_sq"]);
        for h in &self.horizons {
            t.push(vec![
                h.horizon.into(),
                h.runs.into(),
                h.diverged.into(),
                h.mean_sampled_grad_sq.into(),
                h.mean_min_grad_sq.into(),
            ]);
        }
        t
    }
}

impl ToTable for ConvergenceReport {
    fn to_table(&self) -> CsvTable {
        self.result.table.clone()
    }
}

/// Least-squares slope of `ln y` against `ln x` over pairs with positive,
/// finite coordinates. `None` unless at least two distinct `x` remain.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Runs every `(horizon, seed)` pair with `η = c/√T`, `c` taken from the
/// template's schedule coefficient, and about `records_per_run` recorded
/// steps per run.
pub fn convergence_sweep(
    objective: &(impl Objective + ?Sized),
    init: &DenseVector,
    template: &OptimizerConfig,
    horizons: &[usize],
    seeds: &[u64],
    records_per_run: usize,
) -> Result<ConvergenceReport> {
    if horizons.is_empty() || seeds.is_empty() {
        return Err(Error::domain("convergence sweep needs at least one horizon and one seed"));
    }
    if horizons.contains(&0) {
        return Err(Error::domain("horizons must be positive"));
    }
    let c = template.schedule.coefficient();
    let cells: Vec<(usize, u64)> = horizons
        .iter()
        .flat_map(|&h| seeds.iter().map(move |&s| (h, s)))
        .collect();

    let records = cells
        .par_iter()
        .map(|&(horizon, seed)| {
            let cfg = OptimizerConfig {
                schedule: StepSchedule::InvSqrtHorizon(c),
                horizon,
                seed,
                record_every: (horizon / records_per_run.max(1)).max(1),
                keep_iterates: false,
                ..template.clone()
            };
            let rec = run(objective, init.clone(), &cfg)?;
            let sampled_grad_sq = objective.grad(&rec.sampled_iterate).norm_sq();
            Ok((rec, sampled_grad_sq))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = CsvTable::new(&[
        "horizon",
        "seed",
        "step_size",
        "sampled_index",
        "sampled_grad_sq",
        "min_grad_sq",
        "final_loss",
        "diverged",
    ]);
    for ((horizon, seed), (rec, sampled_sq)) in cells.iter().zip(&records) {
        table.push(vec![
            (*horizon).into(),
            (*seed).into(),
            rec.config.step_size(1).into(),
            rec.sampled_index.into(),
            (*sampled_sq).into(),
            rec.min_grad_norm_sq().into(),
            rec.final_loss().into(),
            rec.diverged().into(),
        ]);
    }

    let summaries: Vec<HorizonSummary> = horizons
        .iter()
        .map(|&h| {
            let ok: Vec<_> = cells
                .iter()
                .zip(&records)
                .filter(|((hh, _), _)| *hh == h)
                .map(|(_, r)| r)
                .collect();
            let good: Vec<_> = ok.iter().filter(|(r, _)| !r.diverged()).collect();
            HorizonSummary {
                horizon: h,
                mean_sampled_grad_sq: mean(good.iter().map(|(_, s)| *s)).unwrap_or(f64::NAN),
                mean_min_grad_sq: mean(good.iter().map(|(r, _)| r.min_grad_norm_sq())).unwrap_or(f64::NAN),
                runs: ok.len(),
                diverged: ok.len() - good.len(),
            }
        })
        .collect();

    let slope = |f: fn(&HorizonSummary) -> f64| {
        log_log_slope(&summaries.iter().map(|s| (s.horizon as f64, f(s))).collect::<Vec<_>>())
    };
    Ok(ConvergenceReport {
        result: SweepResult::new(table, seeds),
        slope_min: slope(|s| s.mean_min_grad_sq),
        slope_sampled: slope(|s| s.mean_sampled_grad_sq),
        horizons: summaries,
    })
}
