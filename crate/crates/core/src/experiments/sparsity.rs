use rayon::prelude::*;

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::objectives::Model;
use crate::optim::{run, OptimizerConfig};

use super::{mean, CsvTable, SweepResult, ToTable};

/// Seed-averaged metrics for one `(ε², σ)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityCell {
    pub cut_rate: f64,
    pub sigma: f64,
    pub mean_sparsity: f64,
    pub mean_train_loss: f64,
    pub mean_test_accuracy: f64,
    pub diverged: usize,
}

#[derive(Debug, Clone)]
pub struct SparsityReport {
    /// Columns: `cut_rate, sigma, seed, mean_sparsity, final_train_loss,
    /// test_accuracy, diverged`.
    pub result: SweepResult,
    /// Row-major over the grid: cut rates outer, sigmas inner.
    pub cells: Vec<SparsityCell>,
}

impl SparsityReport {
    pub fn cell(&self, cut_rate: f64, sigma: f64) -> Option<&SparsityCell> {
        self.cells.iter().find(|c| c.cut_rate == cut_rate && c.sigma == sigma)
    }

    /// Columns: `cut_rate, sigma, mean_sparsity, mean_train_loss,
    /// mean_test_accuracy, diverged`.
    pub fn summary_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "cut_rate",
            "sigma",
            "mean_sparsity",
            "mean_train_loss",
            "mean_test_accuracy",
            "diverged",
        ]);
        for c in &self.cells {
            t.push(vec![
                c.cut_rate.into(),
                c.sigma.into(),
                c.mean_sparsity.into(),
                c.mean_train_loss.into(),
                c.mean_test_accuracy.into(),
                c.diverged.into(),
            ]);
        }
        t
    }
}

impl ToTable for SparsityReport {
    fn to_table(&self) -> CsvTable {
        self.result.table.clone()
    }
}

/// Trains `model` for every `(ε², σ, seed)` and reports truncation sparsity,
/// final training loss and held-out accuracy on `test`.
pub fn sparsity_sweep(
    model: &(impl Model + ?Sized),
    test: &Dataset,
    template: &OptimizerConfig,
    cut_rates: &[f64],
    sigmas: &[f64],
    seeds: &[u64],
) -> Result<SparsityReport> {
    if cut_rates.is_empty() || sigmas.is_empty() || seeds.is_empty() {
        return Err(Error::domain("sparsity sweep needs non-empty cut-rate, sigma and seed grids"));
    }
    let cells: Vec<(f64, f64, u64)> = cut_rates
        .iter()
        .flat_map(|&e| sigmas.iter().flat_map(move |&s| seeds.iter().map(move |&k| (e, s, k))))
        .collect();

    let outcomes = cells
        .par_iter()
        .map(|&(cut_rate, sigma, seed)| {
            let cfg = OptimizerConfig {
                cut_rate,
                noise_sigma: sigma,
                seed,
                keep_iterates: false,
                ..template.clone()
            };
            let rec = run(model, model.initial_point(seed), &cfg)?;
            let acc = if rec.diverged() {
                f64::NAN
            } else {
                model.accuracy(&rec.final_iterate, test)
            };
            Ok((rec.mean_sparsity(), rec.final_loss(), acc, rec.diverged()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = CsvTable::new(&[
        "cut_rate",
        "sigma",
        "seed",
        "mean_sparsity",
        "final_train_loss",
        "test_accuracy",
        "diverged",
    ]);
    for (&(e, s, k), &(sp, loss, acc, div)) in cells.iter().zip(&outcomes) {
        table.push(vec![e.into(), s.into(), k.into(), sp.into(), loss.into(), acc.into(), div.into()]);
    }

    let mut summary = Vec::new();
    for &e in cut_rates {
        for &s in sigmas {
            let runs: Vec<_> = cells
                .iter()
                .zip(&outcomes)
                .filter(|((ce, cs, _), _)| *ce == e && *cs == s)
                .map(|(_, o)| o)
                .collect();
            let ok: Vec<_> = runs.iter().filter(|o| !o.3).collect();
            summary.push(SparsityCell {
                cut_rate: e,
                sigma: s,
                mean_sparsity: mean(ok.iter().filter_map(|o| o.0)).unwrap_or(f64::NAN),
                mean_train_loss: mean(ok.iter().map(|o| o.1)).unwrap_or(f64::NAN),
                mean_test_accuracy: mean(ok.iter().map(|o| o.2)).unwrap_or(f64::NAN),
                diverged: runs.len() - ok.len(),
            });
        }
    }
    Ok(SparsityReport {
        result: SweepResult::new(table, seeds),
        cells: summary,
    })
}
