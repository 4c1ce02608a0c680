//! Experiment drivers. Every driver is a deterministic function of its
//! configuration and seed list; independent cells run in parallel but are
//! reported in input order.

mod constants;
mod convergence;
mod escape;
mod gradcheck;
mod sparsity;
mod stability;
mod stable_rank;
mod table;

pub use constants::{estimate_constants, TheoryConstants, TheoryInputs};
pub use convergence::{convergence_sweep, log_log_slope, ConvergenceReport, HorizonSummary};
pub use escape::{escape_experiment, EscapeReport, EscapeSettings, EscapeSummary, EscapeTrial};
pub use gradcheck::{gradient_check, GradCheck, GradCheckReport};
pub use sparsity::{sparsity_sweep, SparsityCell, SparsityReport};
pub use stability::{
    coupled_divergence, generalization_gap, stability_experiment, DivergenceReport, GapReport,
    SeedDivergence, StabilityReport,
};
pub use stable_rank::{
    escape_prescription, stable_rank, stable_rank_from_eigenvalues, EscapePrescription,
    StableRankReport,
};
pub use table::{emit_csv, format_float, read_csv, Cell, CsvTable, ToTable};

use crate::optim::RunRecord;

/// Identifies the code that produced a result.
pub const VERSION: &str = concat!("tsgd-core ", env!("CARGO_PKG_VERSION"));

/// Rows of a sweep, one per `(config, seed)` pair, plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub table: CsvTable,
    pub seeds: Vec<u64>,
    pub version: String,
}

impl SweepResult {
    pub(crate) fn new(table: CsvTable, seeds: &[u64]) -> Self {
        Self {
            table,
            seeds: seeds.to_vec(),
            version: VERSION.to_string(),
        }
    }
}

impl ToTable for SweepResult {
    fn to_table(&self) -> CsvTable {
        self.table.clone()
    }
}

/// Columns: `t, loss, grad_norm, sparsity, threshold, param_norm`. The first
/// row is the initial iterate, with empty truncation columns.
impl ToTable for RunRecord {
    fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["t", "loss", "grad_norm", "sparsity", "threshold", "param_norm"]);
        for m in std::iter::once(&self.initial).chain(&self.steps) {
            t.push(vec![
                m.t.into(),
                m.loss.into(),
                m.grad_norm.into(),
                m.sparsity.into(),
                m.threshold.into(),
                m.param_norm.into(),
            ]);
        }
        t
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}
