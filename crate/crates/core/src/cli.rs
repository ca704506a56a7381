//! `gkdv` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 blow-up guard
//! tripped, 3 verification failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::config::RunConfig;
use crate::dispersion::{verify_cases_with_budget, ExhaustiveReport};
use crate::error::{Error, Result};
use crate::experiments::{
    growth_track, render_growth_plot, render_smoothing_plot, smoothing_scan, write_diagnostics_csv,
    write_growth_csv, write_smoothing_csv, write_trajectory_csv, GrowthParams, SmoothingParams,
};
use crate::fourier::SpectralField;
use crate::nonlinearity::{inclusion_exclusion_residual, polarize_check, MultilinearSpec};
use crate::normal_form::{cancellation_residual, nf_symmetric_spec, sweep_sigma_minus_mu, CancellationKind};
use crate::solver::simulate;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_BLOW_UP: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

/// Name of the resolved-configuration sidecar written by every command.
pub const RESOLVED_CONFIG: &str = "resolved_config.toml";

#[derive(Debug, Parser)]
#[command(name = "gkdv", version, about = "Spectral laboratory for the periodic generalized KdV equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate and write trajectory.csv and diagnostics.csv.
    Simulate(CommonArgs),
    /// Run the exhaustive and identity checks; exit 3 on any failure.
    Verify(CommonArgs),
    /// Measure the nonlinear smoothing gain.
    Smoothing(CommonArgs),
    /// Track Sobolev norms over a long run.
    Growth(CommonArgs),
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the internal pool.
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Run(Error),
    Verification(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    let (command, common): (fn(&RunConfig, &Path) -> std::result::Result<(), Failure>, &CommonArgs) =
        match &cli.command {
            Command::Simulate(a) => (cmd_simulate, a),
            Command::Verify(a) => (cmd_verify, a),
            Command::Smoothing(a) => (cmd_smoothing, a),
            Command::Growth(a) => (cmd_growth, a),
        };
    let result = prepare(common).and_then(|(cfg, out)| command(&cfg, &out));
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(Failure::Verification(lines)) => {
            eprintln!("verification failed:");
            for l in lines {
                eprintln!("  {l}");
            }
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Run(e @ Error::BlowUp { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_BLOW_UP)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn prepare(args: &CommonArgs) -> std::result::Result<(RunConfig, PathBuf), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1").into());
        }
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join(RESOLVED_CONFIG), cfg.to_toml())?;
    let out = cfg.out.clone();
    Ok((cfg, out))
}

fn create(path: PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn initial_data(cfg: &RunConfig) -> Result<SpectralField> {
    let init = &cfg.initial;
    let f = if init.modes.is_empty() {
        SpectralField::random_sobolev(init.s, cfg.model.cutoff, cfg.seed, init.delta)?
    } else {
        let entries: Vec<(i64, Complex64)> = init.modes.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))).collect();
        SpectralField::from_modes(&entries)?
    };
    Ok(&f * init.amplitude)
}

fn cmd_simulate(cfg: &RunConfig, out: &Path) -> std::result::Result<(), Failure> {
    let f = initial_data(cfg)?;
    let traj = simulate(&f, &cfg.solver_config())?;
    let mut w = create(out.join("trajectory.csv"))?;
    write_trajectory_csv(&traj, &mut w)?;
    w.flush()?;
    let mut w = create(out.join("diagnostics.csv"))?;
    write_diagnostics_csv(&traj, &cfg.output.s_list, &mut w)?;
    w.flush()?;
    println!("simulated {} samples to t = {}", traj.len(), traj.last().0);
    Ok(())
}

fn cmd_smoothing(cfg: &RunConfig, out: &Path) -> std::result::Result<(), Failure> {
    let mut params = SmoothingParams::new(
        cfg.initial.s,
        cfg.model.p.clone(),
        cfg.model.cutoff,
        cfg.solver.dt,
        cfg.solver.horizon,
        cfg.seed,
    );
    params.gammas = cfg.smoothing.gammas.clone();
    params.samples = cfg.smoothing.samples;
    params.delta = cfg.initial.delta;
    let report = smoothing_scan(&params)?;
    let mut w = create(out.join("smoothing.csv"))?;
    write_smoothing_csv(&report, &mut w)?;
    w.flush()?;
    fs::write(out.join("smoothing.svg"), render_smoothing_plot(&report))?;
    if report.is_sentinel() {
        println!("gamma_fit = inf (linear flow)");
    } else {
        println!("gamma_fit = {}", report.gamma_fit);
    }
    Ok(())
}

fn cmd_growth(cfg: &RunConfig, out: &Path) -> std::result::Result<(), Failure> {
    let params = GrowthParams {
        s: cfg.initial.s,
        p: cfg.model.p.clone(),
        cutoff: cfg.model.cutoff,
        dt: cfg.solver.dt,
        horizon: cfg.solver.horizon,
        seed: cfg.seed,
        samples: cfg.growth.samples,
        window: cfg.growth.window,
        amplitude: cfg.initial.amplitude,
        delta: cfg.initial.delta,
        epsilon: cfg.growth.epsilon,
    };
    let report = growth_track(&params)?;
    let mut w = create(out.join("growth.csv"))?;
    write_growth_csv(&report, &mut w)?;
    w.flush()?;
    fs::write(out.join("growth.svg"), render_growth_plot(&report))?;
    println!(
        "alpha = {} (ceiling {}), mass drift {:e}, hamiltonian drift {:e}",
        report.alpha, report.ceiling, report.mass_drift, report.hamiltonian_drift
    );
    Ok(())
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn cmd_verify(cfg: &RunConfig, out: &Path) -> std::result::Result<(), Failure> {
    let v = &cfg.verify;
    let c = &v.constants;
    let budget = v.budget as u128;
    let mut checks = Vec::new();

    let reports: Vec<ExhaustiveReport> = v
        .boxes
        .iter()
        .map(|&(n, k)| verify_cases_with_budget(n, k, c, budget))
        .collect::<Result<_>>()?;
    for r in &reports {
        let shown: Vec<String> = r.counterexamples.iter().map(|t| format!("{t:?}")).collect();
        checks.push(Check {
            name: format!("cases n={} K={}", r.n, r.k_max),
            pass: r.violations == 0,
            detail: if r.violations == 0 {
                format!("{} tuples covered", r.tuples)
            } else {
                format!("{} uncovered, e.g. {}", r.violations, shown.join(" "))
            },
        });
    }
    let mut w = create(out.join("verify_cases.csv"))?;
    writeln!(w, "{}", ExhaustiveReport::CSV_HEADER)?;
    for r in &reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;

    for &n in &v.resonant_arities {
        let mut bad = Vec::new();
        for k in 1..=v.resonant_k_max {
            if inclusion_exclusion_residual(k, n, v.resonant_k_max)? != 0 {
                bad.push(k);
            }
        }
        checks.push(Check {
            name: format!("resonant sets n={n}"),
            pass: bad.is_empty(),
            detail: if bad.is_empty() {
                format!("outputs 1..={} consistent", v.resonant_k_max)
            } else {
                format!("mismatched outputs {bad:?}")
            },
        });
    }

    for &n in &v.polarize_arities {
        let vs: Vec<SpectralField> = (0..n as u64)
            .map(|j| SpectralField::random_sobolev(1.0, v.polarize_cutoff, cfg.seed.wrapping_add(j), 0.05))
            .collect::<Result<_>>()?;
        let cutoff = n * v.polarize_cutoff;
        let derivative = MultilinearSpec::new(n, |t: &[i64]| Complex64::new(0.0, t.iter().sum::<i64>() as f64), |_: &[i64]| true);
        for (label, spec) in [("ik", derivative), ("normal form", nf_symmetric_spec(n, c.c_hl))] {
            let r = polarize_check(&spec, &vs, cutoff)?;
            checks.push(Check {
                name: format!("polarization {label} n={n}"),
                pass: r <= v.tolerance,
                detail: format!("residual {r:e}"),
            });
        }
    }

    for &(n, k1, rest) in &v.sigma_mu {
        let sweep = sweep_sigma_minus_mu(n, k1, rest, c.c_hl)?;
        checks.push(Check {
            name: format!("sigma-mu n={n} k1<={k1} rest<={rest}"),
            pass: sweep.mismatches.is_empty() && sweep.bound_constant <= v.sigma_mu_bound,
            detail: format!(
                "{} admissible, {} mismatches, constant {} at {:?}",
                sweep.admissible,
                sweep.mismatches.len(),
                sweep.bound_constant,
                sweep.argmax
            ),
        });
    }

    let kinds = v
        .cancellation_self
        .iter()
        .map(|&n| CancellationKind::SelfN(n))
        .chain(v.cancellation_mixed.iter().map(|&(n, m)| CancellationKind::Mixed(n, m)));
    for kind in kinds {
        let mut worst: f64 = 0.0;
        for &seed in &v.cancellation_seeds {
            let f = SpectralField::random_sobolev(1.0, v.cancellation_cutoff, seed, 0.05)?;
            let u = SpectralField::random_sobolev(1.0, v.cancellation_cutoff, seed.wrapping_add(1000), 0.05)?;
            worst = worst.max(cancellation_residual(kind, &f, &u, c.c_hl)?);
        }
        checks.push(Check {
            name: format!("cancellation {kind:?}"),
            pass: worst <= v.tolerance,
            detail: format!("residual {worst:e}"),
        });
    }

    let mut w = create(out.join("verify.txt"))?;
    for ch in &checks {
        let line = format!("{} {}: {}", if ch.pass { "PASS" } else { "FAIL" }, ch.name, ch.detail);
        println!("{line}");
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed))
    }
}
