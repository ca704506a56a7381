use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gkdv_core::config::RunConfig;
use gkdv_core::experiments::parse_smoothing_csv;

fn gkdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkdv")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MKDV: &str = "
seed = 3
[model]
p = [[1.0, 3]]
cutoff = 16
[solver]
dt = 1e-3
horizon = 0.1
sample_every = 20
[initial]
s = 2.0
";

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", MKDV);
    let out = dir.path().join("a/b/c");
    let o = gkdv(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["trajectory.csv", "diagnostics.csv", "resolved_config.toml"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    // 6 samples of 16 modes plus the header
    assert_eq!(traj.lines().count(), 1 + 6 * 16);
    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().next().unwrap(), "t,mass,hamiltonian,hs_0,hs_1,hs_2,phase");
}

#[test]
fn resolved_config_records_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", MKDV);
    let out = dir.path().join("o");
    let o = gkdv(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("resolved_config.toml")).unwrap();
    let resolved = RunConfig::from_toml(&text).unwrap();
    assert_eq!(resolved.seed, 99);
    assert_eq!(resolved.out, out);
    assert_eq!(resolved.model.cutoff, 16);
    assert_eq!(resolved.verify, RunConfig::default().verify);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", MKDV);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(gkdv(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"]).status.code(), Some(0));
    assert_eq!(gkdv(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "4"]).status.code(), Some(0));
    for f in ["trajectory.csv", "diagnostics.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn seed_changes_random_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", MKDV);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    gkdv(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap()]);
    gkdv(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "4"]);
    assert_ne!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(b.join("trajectory.csv")).unwrap());
}

#[test]
fn nonpositive_dt_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[solver]\ndt = 0.0\n");
    let o = gkdv(&["simulate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("solver.dt"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[model]\ncutof = 8\n");
    let o = gkdv(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cutof"));
    let o = gkdv(&["verify", "--config", dir.path().join("none.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(gkdv(&["simulate"]).status.code(), Some(1));
    assert_eq!(gkdv(&["--help"]).status.code(), Some(0));
}

#[test]
fn blow_up_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let body = "
[model]
p = [[1.0, 5]]
cutoff = 16
[solver]
dt = 0.005
horizon = 5.0
sample_every = 1
[initial]
modes = [[1, 1.0, 0.0]]
";
    let cfg = write_config(dir.path(), "blow.toml", body);
    let o = gkdv(&["simulate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("last good time"), "{}", stderr(&o));
}

#[test]
fn verify_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", "");
    let out = dir.path().join("v");
    let o = gkdv(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("verify.txt")).unwrap();
    assert!(summary.lines().count() >= 20);
    assert!(summary.lines().all(|l| l.starts_with("PASS")));
    let csv = fs::read_to_string(out.join("verify_cases.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn broken_constant_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let body = "
[verify]
boxes = [[2, 20], [3, 10]]
resonant_arities = []
polarize_arities = []
sigma_mu = []
cancellation_self = []
cancellation_mixed = []
[verify.constants]
c_a = 100.0
";
    let cfg = write_config(dir.path(), "v.toml", body);
    let o = gkdv(&["verify", "--config", &cfg, "--out", dir.path().join("v").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("uncovered, e.g. ["), "{err}");
}

#[test]
fn verify_beyond_budget_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", "[verify]\nboxes = [[5, 30]]\n");
    let o = gkdv(&["verify", "--config", &cfg, "--out", dir.path().join("v").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
    let cfg = write_config(dir.path(), "w.toml", "[verify]\nboxes = [[6, 2]]\n");
    let o = gkdv(&["verify", "--config", &cfg, "--out", dir.path().join("w").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

const SMOOTHING: &str = "
seed = 7
[model]
p = [[1.0, 3]]
cutoff = 128
[solver]
dt = 1e-5
horizon = 0.02
[initial]
s = 1.0
[smoothing]
gammas = [0.5, 1.0]
samples = 4
";

#[test]
fn smoothing_writes_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SMOOTHING);
    let out = dir.path().join("new/dir");
    let o = gkdv(&["smoothing", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = parse_smoothing_csv(&fs::read_to_string(out.join("smoothing.csv")).unwrap()).unwrap();
    assert!(report.gamma_fit.is_finite());
    assert_eq!(report.gammas, vec![0.5, 1.0]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("gamma_fit = "));
    let svg = fs::read_to_string(out.join("smoothing.svg")).unwrap();
    roxmltree::Document::parse(&svg).unwrap();
}

#[test]
fn linear_smoothing_records_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMOOTHING.replace("p = [[1.0, 3]]", "p = []");
    let cfg = write_config(dir.path(), "s.toml", &body);
    let out = dir.path().join("o");
    let o = gkdv(&["smoothing", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("smoothing.csv")).unwrap();
    assert!(text.contains("# gamma_fit = inf"));
    assert!(parse_smoothing_csv(&text).unwrap().is_sentinel());
}

#[test]
fn growth_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let body = "
[model]
p = [[1.0, 3]]
cutoff = 16
[solver]
dt = 1e-3
horizon = 2.0
[initial]
s = 2.0
[growth]
samples = 20
window = 0.5
";
    let cfg = write_config(dir.path(), "g.toml", body);
    let out = dir.path().join("g");
    let o = gkdv(&["growth", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("growth.csv")).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# alpha_fit = "));
    roxmltree::Document::parse(&fs::read_to_string(out.join("growth.svg")).unwrap()).unwrap();
}
