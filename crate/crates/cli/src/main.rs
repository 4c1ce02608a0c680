//! `tsgd`: runs the experiment drivers of `tsgd-core` from a config file and
//! writes CSVs plus the effective config to a results directory.
//!
//! Exit status: 0 on success, 1 on a configuration error, 2 on a runtime
//! failure, a divergent `run`, or a failed `gradcheck`.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tsgd_core::datasets::{make_neighbor, read_idx, synth_blobs};
use tsgd_core::experiments::{
    convergence_sweep, coupled_divergence, emit_csv, escape_experiment, generalization_gap, gradient_check,
    sparsity_sweep, stable_rank, CsvTable, EscapeSettings, GradCheckReport, ToTable,
};
use tsgd_core::optim::run;
use tsgd_core::{
    Dataset, DenseVector, LogisticRegression, Mlp, Model, Objective, RngState, SaddleObjective, SaddleSpec,
    SymmetricMatrix,
};

use config::{CliConfig, ConfigError, DataSource, ObjectiveKind, Overrides};

#[derive(Parser, Debug)]
#[command(name = "tsgd", version, about = "Truncated and noisy truncated SGD experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML config file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    cut_rate: Option<f64>,
    /// Noise standard deviation σ.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Step size, or the schedule coefficient.
    #[arg(long, global = true)]
    step: Option<f64>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Comma-separated seed list.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, global = true)]
    record_every: Option<usize>,
    /// Write results here instead of results/<experiment>/<timestamp>.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Compare analytic and finite-difference gradients of every objective.
    Gradcheck,
    /// One optimizer run per seed.
    Run,
    /// Sparsity and held-out accuracy over the ε² × σ grid.
    SweepSparsity,
    /// Gradient-norm decay across horizons with η = c/√T.
    SweepConvergence,
    /// Escape times from the exact saddle per σ.
    Escape,
    /// Coupled divergence on neighbouring datasets and the generalization gap.
    Stability,
    /// Stable rank of (I − ηH)^{2τ}.
    StableRank,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gradcheck => "gradcheck",
            Command::Run => "run",
            Command::SweepSparsity => "sweep-sparsity",
            Command::SweepConvergence => "sweep-convergence",
            Command::Escape => "escape",
            Command::Stability => "stability",
            Command::StableRank => "stable-rank",
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<tsgd_core::Error> for Failure {
    fn from(e: tsgd_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Output {
    dir: PathBuf,
}

impl Output {
    fn create(cfg: &CliConfig, command: Command) -> Result<Self, Failure> {
        let dir = match &cfg.out_dir {
            Some(d) => d.clone(),
            None => {
                let base = Path::new("results").join(command.name());
                let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
                let mut dir = base.join(&stamp);
                let mut k = 1;
                while dir.exists() {
                    dir = base.join(format!("{stamp}-{k}"));
                    k += 1;
                }
                dir
            }
        };
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
        let echo = dir.join("config.toml");
        std::fs::write(&echo, cfg.to_toml()).map_err(|e| Failure::Runtime(format!("{}: {e}", echo.display())))?;
        Ok(Self { dir })
    }

    fn write(&self, name: &str, table: &impl ToTable) -> Outcome {
        emit_csv(table, &self.dir.join(name))?;
        Ok(())
    }
}

fn load_data(cfg: &CliConfig) -> Result<(Dataset, Dataset), Failure> {
    let d = &cfg.data;
    let mut all = match d.source {
        DataSource::Blobs => synth_blobs(
            &mut RngState::new(d.seed),
            d.train_size + d.test_size,
            d.dim,
            d.class_sep,
            d.classes,
        )?,
        DataSource::Idx => {
            let (images, labels) = (d.images.as_ref().unwrap(), d.labels.as_ref().unwrap());
            read_idx(images, labels)?
        }
    };
    if let Some([neg, pos]) = d.binary_classes {
        all = all.binary_subset(neg, pos)?;
    }
    if all.len() < 2 {
        return Err(Failure::Runtime(format!("dataset has {} samples; need at least 2", all.len())));
    }
    let (train, rest) = all.split_at(d.train_size.min(all.len() - 1))?;
    Ok((train, rest.head(d.test_size)?))
}

fn saddle_spec(cfg: &CliConfig) -> Result<SaddleSpec, Failure> {
    Ok(SaddleSpec::new(cfg.objective.saddle_eigenvalues.clone(), cfg.objective.quartic)?)
}

fn build_model(cfg: &CliConfig, train: Dataset) -> Result<Box<dyn Model>, Failure> {
    match cfg.objective.kind {
        ObjectiveKind::Logistic => Ok(Box::new(LogisticRegression::new(train)?)),
        ObjectiveKind::Mlp => Ok(Box::new(Mlp::new(train, cfg.objective.hidden)?)),
        ObjectiveKind::Saddle => Err(Failure::Config(
            "objective.kind = \"saddle\" has no data; this subcommand needs \"logistic\" or \"mlp\"".into(),
        )),
    }
}

fn gradcheck(cfg: &CliConfig, out: &Output) -> Outcome {
    let g = &cfg.gradcheck;
    let (train, _) = load_data(cfg)?;
    let binary = if train.num_classes() == 2 { train.clone() } else { train.binary_subset(0, 1)? };
    let saddle = SaddleObjective::new(saddle_spec(cfg)?);
    let logistic = LogisticRegression::new(binary)?;
    let mlp = Mlp::new(train, cfg.objective.hidden)?;
    let seed = cfg.seeds[0];
    let objectives: [&dyn Objective; 3] = [&saddle, &logistic, &mlp];
    let mut report = GradCheckReport::default();
    for obj in objectives {
        let c = gradient_check(obj, g.probes, g.scale, seed, g.tolerance)?;
        println!(
            "{:<10} max relative error {:.3e} ({})",
            c.objective,
            c.max_relative_error,
            if c.passed() { "ok" } else { "FAILED" }
        );
        report.checks.push(c);
    }
    out.write("gradcheck.csv", &report)?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("gradient check exceeded tolerance {}", g.tolerance)))
    }
}

fn run_seeds(obj: &(impl Objective + ?Sized), init: impl Fn(u64) -> DenseVector, cfg: &CliConfig, out: &Output) -> Outcome {
    let mut diverged = Vec::new();
    for &seed in &cfg.seeds {
        let rec = run(obj, init(seed), &cfg.optimizer.to_config(seed))?;
        out.write(&format!("run_seed{seed}.csv"), &rec)?;
        println!(
            "seed {seed}: T={} final loss {:.6e} mean sparsity {}{}",
            rec.config.horizon,
            rec.final_loss(),
            rec.mean_sparsity().map_or("n/a".to_string(), |s| format!("{s:.4}")),
            if rec.diverged() { " DIVERGED" } else { "" }
        );
        if rec.diverged() {
            diverged.push(seed);
        }
    }
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("run diverged for seeds {diverged:?}")))
    }
}

fn run_cmd(cfg: &CliConfig, out: &Output) -> Outcome {
    match cfg.objective.kind {
        ObjectiveKind::Saddle => {
            let obj = SaddleObjective::new(saddle_spec(cfg)?);
            run_seeds(&obj, |_| DenseVector::zeros(obj.dim()), cfg, out)
        }
        _ => {
            let model = build_model(cfg, load_data(cfg)?.0)?;
            run_seeds(&*model, |s| model.initial_point(s), cfg, out)
        }
    }
}

fn sweep_sparsity(cfg: &CliConfig, out: &Output) -> Outcome {
    let (train, test) = load_data(cfg)?;
    let model = build_model(cfg, train)?;
    let s = &cfg.sweep;
    let r = sparsity_sweep(&*model, &test, &cfg.optimizer.to_config(0), &s.cut_rates, &s.sigmas, &cfg.seeds)?;
    for c in &r.cells {
        println!(
            "cut_rate {:<6} sigma {:<8} sparsity {:.4} train loss {:.4e} test accuracy {:.4} diverged {}",
            c.cut_rate, c.sigma, c.mean_sparsity, c.mean_train_loss, c.mean_test_accuracy, c.diverged
        );
    }
    out.write("sparsity.csv", &r)?;
    out.write("sparsity_summary.csv", &r.summary_table())
}

fn sweep_convergence(cfg: &CliConfig, out: &Output) -> Outcome {
    let s = &cfg.sweep;
    let template = cfg.optimizer.to_config(0);
    let r = match cfg.objective.kind {
        ObjectiveKind::Saddle => {
            let obj = SaddleObjective::new(saddle_spec(cfg)?);
            convergence_sweep(&obj, &DenseVector::zeros(obj.dim()), &template, &s.horizons, &cfg.seeds, s.records_per_run)?
        }
        _ => {
            let model = build_model(cfg, load_data(cfg)?.0)?;
            let init = model.initial_point(cfg.seeds[0]);
            convergence_sweep(&*model, &init, &template, &s.horizons, &cfg.seeds, s.records_per_run)?
        }
    };
    for h in &r.horizons {
        println!(
            "T {:<8} mean min |grad|^2 {:.4e} mean |grad(w_J)|^2 {:.4e} diverged {}",
            h.horizon, h.mean_min_grad_sq, h.mean_sampled_grad_sq, h.diverged
        );
    }
    let show = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.4}"));
    println!("log-log slope: min-gradient {} sampled-iterate {}", show(r.slope_min), show(r.slope_sampled));
    out.write("convergence.csv", &r)?;
    out.write("convergence_summary.csv", &r.summary_table())
}

fn escape(cfg: &CliConfig, out: &Output) -> Outcome {
    let e = &cfg.escape;
    let settings = EscapeSettings {
        sigmas: e.sigmas.clone(),
        seeds: cfg.seeds.clone(),
        loss_drop: e.loss_drop,
        max_steps: e.max_steps,
    };
    let r = escape_experiment(&saddle_spec(cfg)?, &cfg.optimizer.to_config(0), &settings)?;
    for s in &r.summaries {
        println!(
            "sigma {:<8} escaped {}/{} median escape time {}",
            s.sigma,
            s.escaped,
            s.trials,
            s.median_escape_time.map_or("NOT_ESCAPED".to_string(), |m| m.to_string())
        );
    }
    out.write("escape.csv", &r)?;
    out.write("escape_summary.csv", &r.summary_table())
}

fn stability(cfg: &CliConfig, out: &Output) -> Outcome {
    let st = &cfg.stability;
    let (train, test) = load_data(cfg)?;
    let pair = make_neighbor(&train, st.index, test.sample(0))?;
    let a = build_model(cfg, pair.base.clone())?;
    let b = build_model(cfg, pair.variant.clone())?;
    let mut template = cfg.optimizer.to_config(cfg.seeds[0]);
    template.horizon = *st.checkpoints.last().unwrap();
    let init = a.initial_point(cfg.seeds[0]);
    let div = coupled_divergence(&*a, &*b, &init, pair.index, &template, &cfg.seeds, &st.checkpoints)?;
    let gap = generalization_gap(&*a, &test, &template, &st.sigmas, &cfg.seeds)?;
    for (t, d) in div.checkpoints.iter().zip(&div.mean_divergence) {
        println!("t {t:<8} mean divergence {d:.6e}");
    }
    for (s, g) in gap.sigmas.iter().zip(&gap.mean_gap) {
        println!("sigma {s:<8} mean generalization gap {g:.6e}");
    }
    if !div.coupling_held() {
        eprintln!("warning: coupled iterates differed before the replaced sample was drawn");
    }
    if !gap.non_increasing_in_sigma() {
        eprintln!("warning: generalization gap increases with sigma somewhere on the grid");
    }
    out.write("divergence.csv", &div)?;
    out.write("divergence_per_seed.csv", &div.per_seed_table())?;
    out.write("gap.csv", &gap)?;
    out.write("gap_summary.csv", &gap.summary_table())
}

fn stable_rank_cmd(cfg: &CliConfig, out: &Output) -> Outcome {
    let sr = &cfg.stable_rank;
    let h = match &sr.eigenvalues {
        Some(ev) => SymmetricMatrix::diagonal(ev)?,
        None => {
            let hessian = match cfg.objective.kind {
                ObjectiveKind::Saddle => {
                    let obj = SaddleObjective::new(saddle_spec(cfg)?);
                    obj.hessian(&vec![0.0; obj.dim()])
                }
                ObjectiveKind::Logistic => {
                    let obj = LogisticRegression::new(load_data(cfg)?.0)?;
                    obj.hessian(&vec![0.0; obj.dim()])
                }
                ObjectiveKind::Mlp => None,
            };
            hessian.expect("checked before dispatch")
        }
    };
    let r = stable_rank(&h, sr.eta, sr.tau)?;
    println!("dim {} eta {} tau {} stable rank {:.10}", r.eigenvalues.len(), r.eta, r.tau, r.stable_rank);
    let mut spectrum = CsvTable::new(&["index", "eigenvalue"]);
    for (i, l) in r.eigenvalues.iter().enumerate() {
        spectrum.push(vec![i.into(), (*l).into()]);
    }
    out.write("stable_rank.csv", &r)?;
    out.write("spectrum.csv", &spectrum)
}

/// Requirements specific to one subcommand, checked before any output.
fn precheck(command: Command, cfg: &CliConfig) -> Result<(), ConfigError> {
    let kind = cfg.objective.kind;
    let needs_model = matches!(command, Command::SweepSparsity | Command::Stability);
    if needs_model && kind == ObjectiveKind::Saddle {
        return Err(ConfigError(format!(
            "{} needs objective.kind = \"logistic\" or \"mlp\"",
            command.name()
        )));
    }
    if matches!(command, Command::Stability) && cfg.optimizer.batch_size != 1 {
        return Err(ConfigError(format!(
            "stability needs optimizer.batch_size = 1, got {}",
            cfg.optimizer.batch_size
        )));
    }
    if matches!(command, Command::StableRank) && cfg.stable_rank.eigenvalues.is_none() && kind == ObjectiveKind::Mlp {
        return Err(ConfigError(
            "stable-rank needs stable_rank.eigenvalues or objective.kind with a Hessian (\"logistic\" or \"saddle\")".into(),
        ));
    }
    Ok(())
}

fn dispatch(command: Command, cfg: &CliConfig) -> Outcome {
    precheck(command, cfg)?;
    let out = Output::create(cfg, command)?;
    let result = match command {
        Command::Gradcheck => gradcheck(cfg, &out),
        Command::Run => run_cmd(cfg, &out),
        Command::SweepSparsity => sweep_sparsity(cfg, &out),
        Command::SweepConvergence => sweep_convergence(cfg, &out),
        Command::Escape => escape(cfg, &out),
        Command::Stability => stability(cfg, &out),
        Command::StableRank => stable_rank_cmd(cfg, &out),
    };
    println!("results in {}", out.dir.display());
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let f = cli.flags;
    let overrides = Overrides {
        cut_rate: f.cut_rate,
        sigma: f.sigma,
        beta: f.beta,
        step: f.step,
        batch_size: f.batch_size,
        horizon: f.horizon,
        seeds: f.seeds,
        record_every: f.record_every,
        out_dir: f.out_dir,
    };
    let result = config::load(f.config.as_deref(), &overrides)
        .map_err(Failure::from)
        .and_then(|cfg| dispatch(cli.command, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
