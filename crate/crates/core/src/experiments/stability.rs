use rayon::prelude::*;

use crate::datasets::{Dataset, NeighborPair};
use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::objectives::{Model, Objective};
use crate::optim::{run, Optimizer, OptimizerConfig};

use super::{mean, CsvTable, SweepResult, ToTable};

#[derive(Debug, Clone, PartialEq)]
pub struct SeedDivergence {
    pub seed: u64,
    /// First update whose minibatch drew the differing index.
    pub first_hit: Option<usize>,
    /// Iterates were bitwise equal at every `t < first_hit`.
    pub coupling_held: bool,
    /// `‖w_t − w′_t‖` at each checkpoint.
    pub divergence: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub checkpoints: Vec<usize>,
    pub seeds: Vec<SeedDivergence>,
    /// Seed mean at each checkpoint.
    pub mean_divergence: Vec<f64>,
}

impl DivergenceReport {
    pub fn coupling_held(&self) -> bool {
        self.seeds.iter().all(|s| s.coupling_held)
    }

    /// Columns: `seed, first_hit, coupling_held, t, divergence`.
    pub fn per_seed_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["seed", "first_hit", "coupling_held", "t", "divergence"]);
        for s in &self.seeds {
            for (&c, &d) in self.checkpoints.iter().zip(&s.divergence) {
                t.push(vec![s.seed.into(), s.first_hit.into(), s.coupling_held.into(), c.into(), d.into()]);
            }
        }
        t
    }
}

/// Columns: `t, mean_divergence`.
impl ToTable for DivergenceReport {
    fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["t", "mean_divergence"]);
        for (&c, &d) in self.checkpoints.iter().zip(&self.mean_divergence) {
            t.push(vec![c.into(), d.into()]);
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    /// Columns: `sigma, seed, train_loss, test_loss, gap, diverged`.
    pub result: SweepResult,
    pub sigmas: Vec<f64>,
    /// Mean `test loss − train loss` of `w_T` per σ.
    pub mean_gap: Vec<f64>,
}

impl GapReport {
    /// Soft expectation: the mean gap does not grow with σ.
    pub fn non_increasing_in_sigma(&self) -> bool {
        self.mean_gap.windows(2).all(|w| w[1] <= w[0])
    }

    /// Columns: `sigma, mean_gap`.
    pub fn summary_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["sigma", "mean_gap"]);
        for (&s, &g) in self.sigmas.iter().zip(&self.mean_gap) {
            t.push(vec![s.into(), g.into()]);
        }
        t
    }
}

impl ToTable for GapReport {
    fn to_table(&self) -> CsvTable {
        self.result.table.clone()
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub divergence: DivergenceReport,
    pub gap: GapReport,
}

fn coupled_seed<O: Objective + ?Sized>(
    a: &O,
    b: &O,
    init: &DenseVector,
    index: usize,
    cfg: &OptimizerConfig,
    checkpoints: &[usize],
) -> Result<SeedDivergence> {
    let mut oa = Optimizer::new(a, init.clone(), cfg.clone())?;
    let mut ob = Optimizer::new(b, init.clone(), cfg.clone())?;
    let last = checkpoints.last().copied().unwrap_or(0);
    let mut first_hit = None;
    let mut coupling_held = true;
    let mut divergence = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    while oa.t() < last {
        oa.step()?;
        ob.step()?;
        debug_assert_eq!(oa.last_batch(), ob.last_batch());
        let t = oa.t();
        if first_hit.is_none() {
            if oa.last_batch().contains(&index) {
                first_hit = Some(t);
            } else if oa.iterate().iter().zip(ob.iterate().iter()).any(|(x, y)| x.to_bits() != y.to_bits()) {
                coupling_held = false;
            }
        }
        while next < checkpoints.len() && checkpoints[next] == t {
            divergence.push(oa.iterate().distance(ob.iterate()));
            next += 1;
        }
    }
    Ok(SeedDivergence {
        seed: cfg.seed,
        first_hit,
        coupling_held,
        divergence,
    })
}

/// Runs the two objectives in lockstep under common random numbers and
/// records `‖w_t − w′_t‖` at each checkpoint. `index` is the sample where
/// the objectives' datasets differ.
pub fn coupled_divergence<O: Objective + ?Sized>(
    a: &O,
    b: &O,
    init: &DenseVector,
    index: usize,
    template: &OptimizerConfig,
    seeds: &[u64],
    checkpoints: &[usize],
) -> Result<DivergenceReport> {
    if a.dim() != b.dim() || a.num_samples() != b.num_samples() {
        return Err(Error::domain(format!(
            "coupled objectives differ in shape: dim {} vs {}, samples {} vs {}",
            a.dim(),
            b.dim(),
            a.num_samples(),
            b.num_samples()
        )));
    }
    if index >= a.num_samples() {
        return Err(Error::domain(format!("differing index {index} out of range for {} samples", a.num_samples())));
    }
    if seeds.is_empty() || checkpoints.is_empty() {
        return Err(Error::domain("coupled divergence needs seeds and checkpoints"));
    }
    if checkpoints.contains(&0) || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("checkpoints must be positive and strictly increasing"));
    }
    let horizon = *checkpoints.last().unwrap();
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = OptimizerConfig {
                seed,
                horizon,
                keep_iterates: false,
                ..template.clone()
            };
            coupled_seed(a, b, init, index, &cfg, checkpoints)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_divergence = (0..checkpoints.len())
        .map(|k| mean(per_seed.iter().map(|s| s.divergence[k])).unwrap_or(f64::NAN))
        .collect();
    Ok(DivergenceReport {
        checkpoints: checkpoints.to_vec(),
        seeds: per_seed,
        mean_divergence,
    })
}

/// Independent runs per `(σ, seed)`: reports `test loss − train loss` of `w_T`.
pub fn generalization_gap(
    model: &(impl Model + ?Sized),
    test: &Dataset,
    template: &OptimizerConfig,
    sigmas: &[f64],
    seeds: &[u64],
) -> Result<GapReport> {
    if sigmas.is_empty() || seeds.is_empty() {
        return Err(Error::domain("generalization gap needs non-empty sigma and seed grids"));
    }
    let cells: Vec<(f64, u64)> = sigmas.iter().flat_map(|&s| seeds.iter().map(move |&k| (s, k))).collect();
    let outcomes = cells
        .par_iter()
        .map(|&(sigma, seed)| {
            let cfg = OptimizerConfig {
                noise_sigma: sigma,
                seed,
                keep_iterates: false,
                ..template.clone()
            };
            let rec = run(model, model.initial_point(seed), &cfg)?;
            let w = &rec.final_iterate;
            let train = model.loss(w);
            let test_loss = model.dataset_loss(w, test);
            Ok((train, test_loss, rec.diverged()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = CsvTable::new(&["sigma", "seed", "train_loss", "test_loss", "gap", "diverged"]);
    for (&(s, k), &(tr, te, div)) in cells.iter().zip(&outcomes) {
        table.push(vec![s.into(), k.into(), tr.into(), te.into(), (te - tr).into(), div.into()]);
    }
    let mean_gap = sigmas
        .iter()
        .map(|&s| {
            mean(
                cells
                    .iter()
                    .zip(&outcomes)
                    .filter(|((cs, _), o)| *cs == s && !o.2)
                    .map(|(_, o)| o.1 - o.0),
            )
            .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(GapReport {
        result: SweepResult::new(table, seeds),
        sigmas: sigmas.to_vec(),
        mean_gap,
    })
}

/// Coupled divergence on `pair` plus the generalization gap of models
/// trained on `pair.base`. `family` builds a model from a training set.
#[allow(clippy::too_many_arguments)]
pub fn stability_experiment<M: Model>(
    family: impl Fn(&Dataset) -> Result<M>,
    pair: &NeighborPair,
    test: &Dataset,
    template: &OptimizerConfig,
    seeds: &[u64],
    checkpoints: &[usize],
    sigmas: &[f64],
) -> Result<StabilityReport> {
    let a = family(&pair.base)?;
    let b = family(&pair.variant)?;
    let init = a.initial_point(template.seed);
    let divergence = coupled_divergence(&a, &b, &init, pair.index, template, seeds, checkpoints)?;
    let gap = generalization_gap(&a, test, template, sigmas, seeds)?;
    Ok(StabilityReport { divergence, gap })
}
