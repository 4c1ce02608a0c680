//! Config file grammar. Every key is optional; omitted keys take the
//! defaults below. Unknown keys are rejected.
//!
//! ```toml
//! seeds = [0]
//!
//! [optimizer]
//! cut_rate = 0.1          # ε² in [0, 1]
//! noise_sigma = 1e-3      # σ ≥ 0
//! beta = 0.0              # β in [0, 0.5]
//! schedule = "constant"   # "constant" | "inv_sqrt_horizon" | "inv_t"
//! step = 0.1              # η, or the coefficient c of c/√T and c/t
//! batch_size = 100
//! horizon = 1000
//! record_every = 10
//! # fixed_threshold = 1e-3
//!
//! [objective]
//! kind = "logistic"       # "logistic" | "mlp" | "saddle"
//! hidden = 32
//! saddle_eigenvalues = [-1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
//! quartic = 1.0
//!
//! [data]
//! source = "blobs"        # "blobs" | "idx"
//! train_size = 200
//! test_size = 200
//! dim = 5
//! classes = 2
//! class_sep = 2.0
//! seed = 0
//! # images = "train-images-idx3-ubyte"
//! # labels = "train-labels-idx1-ubyte"
//! # binary_classes = [0, 1]
//! ```
//!
//! The `[sweep]`, `[escape]`, `[stability]`, `[stable_rank]` and
//! `[gradcheck]` sections hold per-experiment grids.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tsgd_core::{OptimizerConfig, StepSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
    pub optimizer: OptimizerSection,
    pub objective: ObjectiveSection,
    pub data: DataSection,
    pub gradcheck: GradcheckSection,
    pub sweep: SweepSection,
    pub escape: EscapeSection,
    pub stability: StabilitySection,
    pub stable_rank: StableRankSection,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            seeds: vec![0],
            out_dir: None,
            optimizer: OptimizerSection::default(),
            objective: ObjectiveSection::default(),
            data: DataSection::default(),
            gradcheck: GradcheckSection::default(),
            sweep: SweepSection::default(),
            escape: EscapeSection::default(),
            stability: StabilitySection::default(),
            stable_rank: StableRankSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    InvSqrtHorizon,
    InvT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub cut_rate: f64,
    pub noise_sigma: f64,
    pub beta: f64,
    pub schedule: ScheduleKind,
    pub step: f64,
    pub batch_size: usize,
    pub horizon: usize,
    pub record_every: usize,
    pub fixed_threshold: Option<f64>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            cut_rate: d.cut_rate,
            noise_sigma: d.noise_sigma,
            beta: d.beta,
            schedule: ScheduleKind::Constant,
            step: d.schedule.coefficient(),
            batch_size: d.batch_size,
            horizon: d.horizon,
            record_every: d.record_every,
            fixed_threshold: None,
        }
    }
}

impl OptimizerSection {
    pub fn to_config(&self, seed: u64) -> OptimizerConfig {
        let schedule = match self.schedule {
            ScheduleKind::Constant => StepSchedule::Constant(self.step),
            ScheduleKind::InvSqrtHorizon => StepSchedule::InvSqrtHorizon(self.step),
            ScheduleKind::InvT => StepSchedule::InvT(self.step),
        };
        OptimizerConfig {
            cut_rate: self.cut_rate,
            noise_sigma: self.noise_sigma,
            beta: self.beta,
            schedule,
            batch_size: self.batch_size,
            horizon: self.horizon,
            seed,
            record_every: self.record_every,
            fixed_threshold: self.fixed_threshold,
            keep_iterates: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Logistic,
    Mlp,
    Saddle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveSection {
    pub kind: ObjectiveKind,
    pub hidden: usize,
    pub saddle_eigenvalues: Vec<f64>,
    pub quartic: f64,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        let mut saddle_eigenvalues = vec![1.0; 10];
        saddle_eigenvalues[0] = -1.0;
        Self {
            kind: ObjectiveKind::Logistic,
            hidden: 32,
            saddle_eigenvalues,
            quartic: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Blobs,
    Idx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub source: DataSource,
    pub train_size: usize,
    pub test_size: usize,
    pub dim: usize,
    pub classes: usize,
    pub class_sep: f64,
    pub seed: u64,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// `[negative, positive]` labels kept for logistic regression on IDX data.
    pub binary_classes: Option<[usize; 2]>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            source: DataSource::Blobs,
            train_size: 200,
            test_size: 200,
            dim: 5,
            classes: 2,
            class_sep: 2.0,
            seed: 0,
            images: None,
            labels: None,
            binary_classes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckSection {
    pub probes: usize,
    pub scale: f64,
    pub tolerance: f64,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        Self {
            probes: 100,
            scale: 1.0,
            tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub cut_rates: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub horizons: Vec<usize>,
    pub records_per_run: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            cut_rates: vec![0.01, 0.1, 0.2, 0.5, 0.9],
            sigmas: vec![1e-3],
            horizons: vec![100, 1_000, 10_000],
            records_per_run: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscapeSection {
    pub sigmas: Vec<f64>,
    pub loss_drop: f64,
    pub max_steps: usize,
}

impl Default for EscapeSection {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 1e-4, 1e-3, 1e-2],
            loss_drop: 0.1,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    /// Training sample replaced by the first test sample.
    pub index: usize,
    pub checkpoints: Vec<usize>,
    pub sigmas: Vec<f64>,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            index: 0,
            checkpoints: vec![1_000, 10_000],
            sigmas: vec![0.0, 1e-3, 1e-2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StableRankSection {
    /// Diagonal Hessian; when absent the objective's Hessian at the origin is used.
    pub eigenvalues: Option<Vec<f64>>,
    pub eta: f64,
    pub tau: u32,
}

impl Default for StableRankSection {
    fn default() -> Self {
        Self {
            eigenvalues: None,
            eta: 0.1,
            tau: 10,
        }
    }
}

/// Command-line values that replace file values when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub cut_rate: Option<f64>,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    pub step: Option<f64>,
    pub batch_size: Option<usize>,
    pub horizon: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub record_every: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parses a config document. Errors are single-line and carry the location.
pub fn parse_str(text: &str, origin: &str) -> Result<CliConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
        let msg = e.message().replace('\n', " ");
        ConfigError(match line {
            Some(l) => format!("{origin}:{l}: {msg}"),
            None => format!("{origin}: {msg}"),
        })
    })
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<CliConfig, ConfigError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
            parse_str(&text, &p.display().to_string())?
        }
        None => CliConfig::default(),
    };
    cfg.apply(overrides);
    cfg.validate()?;
    Ok(cfg)
}

fn check_unit(key: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        err(format!("{key} must lie in [0, 1], got {v}"))
    }
}

fn check_nonneg(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        err(format!("{key} must be finite and >= 0, got {v}"))
    }
}

fn check_pos(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        err(format!("{key} must be finite and > 0, got {v}"))
    }
}

fn check_nonempty<T>(key: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        err(format!("{key} must not be empty"))
    } else {
        Ok(())
    }
}

impl CliConfig {
    pub fn apply(&mut self, o: &Overrides) {
        let opt = &mut self.optimizer;
        opt.cut_rate = o.cut_rate.unwrap_or(opt.cut_rate);
        opt.noise_sigma = o.sigma.unwrap_or(opt.noise_sigma);
        opt.beta = o.beta.unwrap_or(opt.beta);
        opt.step = o.step.unwrap_or(opt.step);
        opt.batch_size = o.batch_size.unwrap_or(opt.batch_size);
        opt.horizon = o.horizon.unwrap_or(opt.horizon);
        opt.record_every = o.record_every.unwrap_or(opt.record_every);
        if let Some(s) = &o.seeds {
            self.seeds = s.clone();
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = Some(d.clone());
        }
    }

    /// Range checks shared by every subcommand. Keys are named as in the file.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let o = &self.optimizer;
        check_nonempty("seeds", &self.seeds)?;
        check_unit("optimizer.cut_rate", o.cut_rate)?;
        check_nonneg("optimizer.noise_sigma", o.noise_sigma)?;
        if !(0.0..=0.5).contains(&o.beta) {
            return err(format!("optimizer.beta must lie in [0, 0.5], got {}", o.beta));
        }
        check_pos("optimizer.step", o.step)?;
        if o.batch_size == 0 {
            return err("optimizer.batch_size must be at least 1");
        }
        if o.record_every == 0 {
            return err("optimizer.record_every must be at least 1");
        }
        if let Some(k) = o.fixed_threshold {
            check_pos("optimizer.fixed_threshold", k)?;
        }

        let obj = &self.objective;
        if obj.hidden == 0 {
            return err("objective.hidden must be at least 1");
        }
        check_pos("objective.quartic", obj.quartic)?;
        check_nonempty("objective.saddle_eigenvalues", &obj.saddle_eigenvalues)?;
        if !obj.saddle_eigenvalues.iter().any(|&l| l < 0.0) {
            return err("objective.saddle_eigenvalues must contain a negative value");
        }

        let d = &self.data;
        if d.train_size == 0 || d.test_size == 0 {
            return err("data.train_size and data.test_size must be at least 1");
        }
        if d.dim == 0 {
            return err("data.dim must be at least 1");
        }
        if d.classes < 2 {
            return err(format!("data.classes must be at least 2, got {}", d.classes));
        }
        check_pos("data.class_sep", d.class_sep)?;
        if d.source == DataSource::Idx && (d.images.is_none() || d.labels.is_none()) {
            return err("data.images and data.labels are required when data.source = \"idx\"");
        }
        if obj.kind == ObjectiveKind::Logistic && d.source == DataSource::Blobs && d.classes != 2 {
            return err(format!("logistic regression needs data.classes = 2, got {}", d.classes));
        }
        if obj.kind == ObjectiveKind::Logistic && d.source == DataSource::Idx && d.binary_classes.is_none() {
            return err("logistic regression on IDX data needs data.binary_classes");
        }

        if self.gradcheck.probes == 0 {
            return err("gradcheck.probes must be at least 1");
        }
        check_pos("gradcheck.scale", self.gradcheck.scale)?;
        check_pos("gradcheck.tolerance", self.gradcheck.tolerance)?;

        let s = &self.sweep;
        check_nonempty("sweep.cut_rates", &s.cut_rates)?;
        for &c in &s.cut_rates {
            check_unit("sweep.cut_rates", c)?;
        }
        check_nonempty("sweep.sigmas", &s.sigmas)?;
        for &v in &s.sigmas {
            check_nonneg("sweep.sigmas", v)?;
        }
        check_nonempty("sweep.horizons", &s.horizons)?;
        if s.horizons.contains(&0) {
            return err("sweep.horizons must be positive");
        }
        if s.records_per_run == 0 {
            return err("sweep.records_per_run must be at least 1");
        }

        let e = &self.escape;
        check_nonempty("escape.sigmas", &e.sigmas)?;
        for &v in &e.sigmas {
            check_nonneg("escape.sigmas", v)?;
        }
        check_pos("escape.loss_drop", e.loss_drop)?;

        let st = &self.stability;
        check_nonempty("stability.checkpoints", &st.checkpoints)?;
        if st.checkpoints.contains(&0) || st.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return err("stability.checkpoints must be positive and strictly increasing");
        }
        if st.index >= d.train_size {
            return err(format!("stability.index {} must be below data.train_size {}", st.index, d.train_size));
        }
        check_nonempty("stability.sigmas", &st.sigmas)?;
        for &v in &st.sigmas {
            check_nonneg("stability.sigmas", v)?;
        }

        check_pos("stable_rank.eta", self.stable_rank.eta)?;
        if let Some(ev) = &self.stable_rank.eigenvalues {
            check_nonempty("stable_rank.eigenvalues", ev)?;
            if ev.iter().any(|x| !x.is_finite()) {
                return err("stable_rank.eigenvalues must be finite");
            }
        }
        Ok(())
    }

    /// The effective configuration as a TOML document.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_str("", "test").unwrap();
        assert_eq!(cfg, CliConfig::default());
        assert_eq!(cfg.optimizer.cut_rate, 0.1);
        assert_eq!(cfg.optimizer.noise_sigma, 1e-3);
        assert_eq!(cfg.optimizer.beta, 0.0);
        assert_eq!(cfg.optimizer.step, 0.1);
        assert_eq!(cfg.optimizer.batch_size, 100);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_str("[optimizer]\ncut_rat = 0.2\n", "cfg.toml").unwrap_err();
        assert!(e.0.contains("cut_rat"), "{e}");
        assert!(e.0.starts_with("cfg.toml:2:"), "{e}");
        assert!(!e.0.contains('\n'));
    }

    #[test]
    fn type_mismatch_is_single_line() {
        let e = parse_str("[optimizer]\nhorizon = \"long\"\n", "cfg.toml").unwrap_err();
        assert!(!e.0.contains('\n'), "{e}");
    }

    #[test]
    fn cut_rate_out_of_range_is_named() {
        let mut cfg = parse_str("[optimizer]\ncut_rate = 1.5\n", "t").unwrap();
        let e = cfg.validate().unwrap_err();
        assert!(e.0.contains("cut_rate"), "{e}");
        cfg.apply(&Overrides { cut_rate: Some(0.5), ..Overrides::default() });
        cfg.validate().unwrap();
    }

    #[test]
    fn flags_override_file_values() {
        let mut cfg = parse_str("[optimizer]\nnoise_sigma = 1e-3\n", "t").unwrap();
        cfg.apply(&Overrides { sigma: Some(0.0), seeds: Some(vec![4, 5]), ..Overrides::default() });
        assert_eq!(cfg.optimizer.noise_sigma, 0.0);
        assert_eq!(cfg.seeds, vec![4, 5]);
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = CliConfig::default();
        cfg.optimizer.fixed_threshold = Some(1e-3);
        cfg.stable_rank.eigenvalues = Some(vec![-1.0, 2.0]);
        assert_eq!(parse_str(&cfg.to_toml(), "echo").unwrap(), cfg);
    }
}
