use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::objectives::{Objective, SaddleObjective, SaddleSpec};
use crate::optim::{Optimizer, OptimizerConfig};

use super::{CsvTable, SweepResult, ToTable};

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeSettings {
    pub sigmas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// F: escape means `f(w_t) ≤ f(0) − F`.
    pub loss_drop: f64,
    /// τ_max, the update budget per trial.
    pub max_steps: usize,
}

impl Default for EscapeSettings {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 1e-4, 1e-3, 1e-2],
            seeds: (0..50).collect(),
            loss_drop: 0.1,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeTrial {
    pub sigma: f64,
    pub seed: u64,
    /// First `t` with `f(w_t) ≤ f(0) − F`; `None` if not escaped.
    pub escape_time: Option<usize>,
    /// Updates performed: the escape time or `max_steps`.
    pub steps: usize,
    /// Every iterate was bitwise equal to the origin.
    pub stayed_at_origin: bool,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeSummary {
    pub sigma: f64,
    pub trials: usize,
    pub escaped: usize,
    /// Median escape time with non-escapes counted as infinite; `None` when
    /// that median is infinite.
    pub median_escape_time: Option<f64>,
}

impl EscapeSummary {
    pub fn escape_rate(&self) -> f64 {
        self.escaped as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone)]
pub struct EscapeReport {
    /// Columns: `sigma, seed, escaped, escape_time, steps, final_loss`.
    pub result: SweepResult,
    pub trials: Vec<EscapeTrial>,
    pub summaries: Vec<EscapeSummary>,
}

impl EscapeReport {
    /// Columns: `sigma, trials, escaped, escape_rate, median_escape_time`.
    pub fn summary_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["sigma", "trials", "escaped", "escape_rate", "median_escape_time"]);
        for s in &self.summaries {
            t.push(vec![
                s.sigma.into(),
                s.trials.into(),
                s.escaped.into(),
                s.escape_rate().into(),
                s.median_escape_time.into(),
            ]);
        }
        t
    }
}

impl ToTable for EscapeReport {
    fn to_table(&self) -> CsvTable {
        self.result.table.clone()
    }
}

fn median_with_infinity(mut times: Vec<f64>) -> Option<f64> {
    if times.is_empty() {
        return None;
    }
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let m = if n % 2 == 1 {
        times[n / 2]
    } else {
        0.5 * (times[n / 2 - 1] + times[n / 2])
    };
    m.is_finite().then_some(m)
}

fn escape_trial(obj: &SaddleObjective, template: &OptimizerConfig, settings: &EscapeSettings, sigma: f64, seed: u64) -> Result<EscapeTrial> {
    let cfg = OptimizerConfig {
        noise_sigma: sigma,
        seed,
        batch_size: 1,
        horizon: settings.max_steps,
        keep_iterates: false,
        ..template.clone()
    };
    let origin = DenseVector::zeros(obj.dim());
    let target = obj.loss(&origin) - settings.loss_drop;
    let mut opt = Optimizer::new(obj, origin, cfg)?;
    let mut stayed = true;
    let mut escape_time = None;
    while opt.t() < settings.max_steps {
        opt.step()?;
        let w = opt.iterate();
        stayed &= w.iter().all(|x| x.to_bits() == 0);
        if !w.is_finite() {
            return Err(Error::NonFinite(format!("escape trial sigma={sigma} seed={seed} at t={}", opt.t())));
        }
        if obj.loss(w) <= target {
            escape_time = Some(opt.t());
            break;
        }
    }
    Ok(EscapeTrial {
        sigma,
        seed,
        escape_time,
        steps: opt.t(),
        stayed_at_origin: stayed,
        final_loss: obj.loss(opt.iterate()),
    })
}

/// NT-SGD from the exact origin of the saddle for every `(σ, seed)`. The
/// template supplies ε², β, the schedule and any fixed threshold; batch size
/// is forced to 1 and the horizon to `max_steps`.
pub fn escape_experiment(spec: &SaddleSpec, template: &OptimizerConfig, settings: &EscapeSettings) -> Result<EscapeReport> {
    if settings.sigmas.is_empty() || settings.seeds.is_empty() {
        return Err(Error::domain("escape experiment needs non-empty sigma and seed grids"));
    }
    if !(settings.loss_drop > 0.0 && settings.loss_drop.is_finite()) {
        return Err(Error::domain(format!("loss_drop must be > 0, got {}", settings.loss_drop)));
    }
    let obj = SaddleObjective::new(spec.clone());
    let cells: Vec<(f64, u64)> = settings
        .sigmas
        .iter()
        .flat_map(|&s| settings.seeds.iter().map(move |&k| (s, k)))
        .collect();
    let trials = cells
        .par_iter()
        .map(|&(sigma, seed)| escape_trial(&obj, template, settings, sigma, seed))
        .collect::<Result<Vec<_>>>()?;

    let mut table = CsvTable::new(&["sigma", "seed", "escaped", "escape_time", "steps", "final_loss"]);
    for tr in &trials {
        table.push(vec![
            tr.sigma.into(),
            tr.seed.into(),
            tr.escape_time.is_some().into(),
            tr.escape_time.into(),
            tr.steps.into(),
            tr.final_loss.into(),
        ]);
    }
    let summaries = settings
        .sigmas
        .iter()
        .map(|&sigma| {
            let ts: Vec<_> = trials.iter().filter(|t| t.sigma == sigma).collect();
            EscapeSummary {
                sigma,
                trials: ts.len(),
                escaped: ts.iter().filter(|t| t.escape_time.is_some()).count(),
                median_escape_time: median_with_infinity(
                    ts.iter().map(|t| t.escape_time.map_or(f64::INFINITY, |x| x as f64)).collect(),
                ),
            }
        })
        .collect();
    Ok(EscapeReport {
        result: SweepResult::new(table, &settings.seeds),
        trials,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_counts_non_escapes_as_infinite() {
        assert_eq!(median_with_infinity(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median_with_infinity(vec![1.0, f64::INFINITY, 3.0]), Some(3.0));
        assert_eq!(median_with_infinity(vec![1.0, f64::INFINITY]), None);
        assert_eq!(median_with_infinity(vec![]), None);
    }

    #[test]
    fn zero_noise_never_leaves_origin() {
        let spec = SaddleSpec::single_negative(4, -1.0, 1.0).unwrap();
        let settings = EscapeSettings {
            sigmas: vec![0.0],
            seeds: vec![0, 1],
            loss_drop: 0.1,
            max_steps: 200,
        };
        let cfg = OptimizerConfig {
            schedule: crate::optim::StepSchedule::Constant(0.05),
            ..OptimizerConfig::default()
        };
        let r = escape_experiment(&spec, &cfg, &settings).unwrap();
        assert!(r.trials.iter().all(|t| t.escape_time.is_none() && t.stayed_at_origin && t.steps == 200));
        assert_eq!(r.summaries[0].median_escape_time, None);
    }
}
