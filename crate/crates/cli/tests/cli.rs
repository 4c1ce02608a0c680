use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tsgd(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tsgd"));
    cmd.current_dir(dir).args(args);
    if let Some(text) = config {
        let path = dir.join("input.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

fn out_dir(tmp: &Path, name: &str) -> PathBuf {
    tmp.join(name)
}

#[test]
fn gradcheck_passes_on_shipped_objectives() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["gradcheck", "--out-dir", "g"], None, tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(&out_dir(tmp.path(), "g"), "gradcheck.csv");
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",1")));
}

#[test]
fn zero_horizon_run_emits_initial_state() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["run", "--horizon", "0", "--out-dir", "r"], None, tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(&out_dir(tmp.path(), "r"), "run_seed0.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,loss,grad_norm,sparsity,threshold,param_norm");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn escape_without_noise_reports_no_escapes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[escape]\nsigmas = [0.0]\nmax_steps = 2000\n";
    let o = tsgd(&["escape", "--seeds", "0,1,2", "--out-dir", "e"], Some(cfg), tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(&out_dir(tmp.path(), "e"), "escape.csv");
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("0")));
    assert!(String::from_utf8_lossy(&o.stdout).contains("NOT_ESCAPED"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "seeds = [0, 1]\n\
               [optimizer]\nhorizon = 200\nbatch_size = 10\n\
               [objective]\nkind = \"mlp\"\nhidden = 4\n\
               [data]\nclasses = 3\ndim = 4\n\
               [sweep]\ncut_rates = [0.1, 0.5]\nsigmas = [0.0, 0.001]\nhorizons = [50, 200]\n\
               [escape]\nmax_steps = 3000\n";
    for cmd in ["run", "sweep-sparsity", "sweep-convergence", "escape"] {
        let a = tsgd(&[cmd, "--out-dir", "a"], Some(cfg), tmp.path());
        let b = tsgd(&[cmd, "--out-dir", "b"], Some(cfg), tmp.path());
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", stderr(&a));
        assert_eq!(b.status.code(), Some(0), "{cmd}: {}", stderr(&b));
        let mut names: Vec<_> = std::fs::read_dir(tmp.path().join("a"))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .filter(|n| n != "config.toml")
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            let fa = std::fs::read(tmp.path().join("a").join(&n)).unwrap();
            let fb = std::fs::read(tmp.path().join("b").join(&n)).unwrap();
            assert_eq!(fa, fb, "{cmd}: {n:?}");
        }
        std::fs::remove_dir_all(tmp.path().join("a")).unwrap();
        std::fs::remove_dir_all(tmp.path().join("b")).unwrap();
    }
}

#[test]
fn every_result_directory_holds_the_effective_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["run", "--horizon", "5"], None, tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let runs: Vec<_> = std::fs::read_dir(tmp.path().join("results/run")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let dir = runs.into_iter().next().unwrap().unwrap().path();
    assert!(read(&dir, "config.toml").contains("horizon = 5"));
}

#[test]
fn out_of_range_cut_rate_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["run", "--out-dir", "x"], Some("[optimizer]\ncut_rate = 1.5\n"), tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("cut_rate"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["run"], Some("[optimizer]\nlearning_rate = 0.1\n"), tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learning_rate"), "{}", stderr(&o));
}

#[test]
fn type_mismatch_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["run"], Some("seeds = \"all\"\n"), tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{}", stderr(&o));
}

#[test]
fn flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[optimizer]\nnoise_sigma = 1e-3\nhorizon = 3\n";
    let o = tsgd(&["run", "--sigma", "0", "--out-dir", "o"], Some(cfg), tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = read(&out_dir(tmp.path(), "o"), "config.toml");
    assert!(echo.contains("noise_sigma = 0.0"), "{echo}");
    assert!(echo.contains("horizon = 3"), "{echo}");
}

#[test]
fn stability_requires_single_sample_batches() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["stability"], None, tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("batch_size"));
}

#[test]
fn stability_writes_divergence_and_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "seeds = [0, 1]\n[optimizer]\nbatch_size = 1\nschedule = \"inv_t\"\nstep = 1.0\n\
               [stability]\ncheckpoints = [50, 500]\nindex = 3\n";
    let o = tsgd(&["stability", "--out-dir", "s"], Some(cfg), tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = out_dir(tmp.path(), "s");
    assert_eq!(read(&dir, "divergence.csv").lines().count(), 3);
    assert_eq!(read(&dir, "gap.csv").lines().count(), 7);
}

#[test]
fn stable_rank_of_two_by_two_example() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[stable_rank]\neigenvalues = [-1.0, 1.0]\neta = 0.1\ntau = 10\n";
    let o = tsgd(&["stable-rank", "--out-dir", "k"], Some(cfg), tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(&out_dir(tmp.path(), "k"), "stable_rank.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let rank: f64 = row[3].parse().unwrap();
    assert!((rank - 1.018_071_595_021_380_3).abs() < 1e-12);
}

#[test]
fn divergent_run_exits_with_runtime_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[objective]\nkind = \"saddle\"\n[optimizer]\nstep = 50.0\nbatch_size = 1\nnoise_sigma = 1.0\n";
    let o = tsgd(&["run", "--out-dir", "d"], Some(cfg), tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(out_dir(tmp.path(), "d").join("run_seed0.csv").exists());
}

#[test]
fn saddle_is_not_a_classifier() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsgd(&["sweep-sparsity"], Some("[objective]\nkind = \"saddle\"\n"), tmp.path());
    assert_eq!(o.status.code(), Some(1));
}
