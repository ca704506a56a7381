//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed here and not configurable.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gkdv_core::dispersion::{h_n, h_n_telescoped, verify_cases, ComparabilityConstants};
use gkdv_core::experiments::{
    growth_track, parse_growth_csv, render_growth_plot, smoothing_scan, write_growth_csv, GrowthParams,
    SmoothingParams, GROWTH_HEADER,
};
use gkdv_core::fourier::airy_phase;
use gkdv_core::gauge::{gauge_forward, gauge_inverse};
use gkdv_core::nonlinearity::{dx_p, hl_apply, polarize_check, resonant_r1, resonant_r2, MultilinearSpec};
use gkdv_core::normal_form::{
    airy_time_derivative, cancellation_residual, nf_bound_ratio, nf_symmetric_spec, sweep_sigma_minus_mu,
    t_nf_diag, w_decompose, w_initial, w_rhs_terms, CancellationKind, NormalFormConfig,
};
use gkdv_core::solver::{invariants, simulate, Equation, SolverConfig, Stepper};
use gkdv_core::{PolyNonlinearity, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c_hl() -> f64 {
    ComparabilityConstants::default().c_hl
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    if elapsed <= Duration::from_secs(limit_s) {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit_s} s"))
    }
}

fn nonzero_box(n: usize, k: i64, f: &mut impl FnMut(&[i64])) {
    let range: Vec<i64> = (-k..=k).filter(|&x| x != 0).collect();
    let mut idx = vec![0usize; n];
    let mut t = vec![0i64; n];
    loop {
        for j in 0..n {
            t[j] = range[idx[j]];
        }
        f(&t);
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            idx[j] += 1;
            if idx[j] < range.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn direct_h(t: &[i64]) -> i128 {
    let k: i128 = t.iter().map(|&x| x as i128).sum();
    k.pow(3) - t.iter().map(|&x| (x as i128).pow(3)).sum::<i128>()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut bad: Option<Vec<i64>> = None;
    for n in 2..=5 {
        nonzero_box(n, 8, &mut |t| {
            checked += 1;
            let d = direct_h(t);
            if bad.is_none() && (h_n(t).ok() != Some(d) || h_n_telescoped(t).ok() != Some(d)) {
                bad = Some(t.to_vec());
            }
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20261016);
    for _ in 0..100_000 {
        let n = rng.gen_range(2..=8);
        let t: Vec<i64> = (0..n).map(|_| rng.gen_range(-1000..=1000)).collect();
        checked += 1;
        let d = direct_h(&t);
        if bad.is_none() && (h_n(&t).ok() != Some(d) || h_n_telescoped(&t).ok() != Some(d)) {
            bad = Some(t);
        }
    }
    if let Some(t) = bad {
        return Err(format!("mismatch at {t:?}"));
    }
    within(start.elapsed(), 60)?;
    Ok(format!("{checked} tuples agree with (sum k)^3 - sum k^3 in {:.1?}", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let c = ComparabilityConstants::default();
    let mut parts = Vec::new();
    for (n, k) in [(2, 50), (3, 30), (4, 12), (5, 8)] {
        let r = verify_cases(n, k, &c).map_err(|e| e.to_string())?;
        if r.violations != 0 {
            return Err(format!("n={n} K={k}: {} uncovered, first {:?}", r.violations, r.counterexamples.first()));
        }
        parts.push(format!("n={n}:{}", r.tuples));
    }
    within(start.elapsed(), 300)?;
    Ok(format!("0 uncovered ({}) in {:.1?}", parts.join(" "), start.elapsed()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let kinds = [
        CancellationKind::SelfN(2),
        CancellationKind::SelfN(3),
        CancellationKind::SelfN(4),
        CancellationKind::Mixed(2, 3),
        CancellationKind::Mixed(3, 4),
    ];
    let mut worst: f64 = 0.0;
    for kind in kinds {
        for seed in 0..5u64 {
            let f = SpectralField::random_sobolev(1.0, 12, 100 + seed, 0.05).map_err(|e| e.to_string())?;
            let u = SpectralField::random_sobolev(1.0, 12, 200 + seed, 0.05).map_err(|e| e.to_string())?;
            let r = cancellation_residual(kind, &f, &u, c_hl()).map_err(|e| e.to_string())?;
            if !(r <= 1e-12) {
                return Err(format!("{kind:?} seed {seed}: residual {r:e}"));
            }
            worst = worst.max(r);
        }
    }
    within(start.elapsed(), 300)?;
    Ok(format!("worst relative residual {worst:.2e} over 25 runs"))
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    for n in [3, 4] {
        let s = sweep_sigma_minus_mu(n, 1000, 10, c_hl()).map_err(|e| e.to_string())?;
        if !s.mismatches.is_empty() {
            return Err(format!("n={n}: closed form differs at {:?}", s.mismatches[0]));
        }
        if !(s.bound_constant <= 10.0) {
            return Err(format!("n={n}: bound constant {} at {:?}", s.bound_constant, s.argmax));
        }
        parts.push(format!("n={n}: {} exact, C={:.4}", s.admissible, s.bound_constant));
    }
    Ok(parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=4usize {
        let vs: Vec<SpectralField> = (0..n as u64)
            .map(|j| SpectralField::random_sobolev(1.0, 6, 40 + j, 0.05).unwrap())
            .collect();
        let deriv = MultilinearSpec::new(n, |t: &[i64]| Complex64::new(0.0, t.iter().sum::<i64>() as f64), |_: &[i64]| true);
        for (label, spec) in [("ik", deriv), ("T_NF", nf_symmetric_spec(n, c_hl()))] {
            let r = polarize_check(&spec, &vs, n * 6).map_err(|e| e.to_string())?;
            if !(r <= 1e-12) {
                return Err(format!("{label} n={n}: residual {r:e}"));
            }
            worst = worst.max(r);
        }
    }
    Ok(format!("worst relative residual {worst:.2e}"))
}

/// Pieces of `∂_x P(u)` by direct enumeration of input tuples:
/// (resonant, dominated non-resonant, remaining non-resonant).
fn enumerate_pieces(u: &SpectralField, p: &PolyNonlinearity, c: f64) -> [Vec<Complex64>; 3] {
    let n = u.cutoff() as i64;
    let band = p.max_degree() as usize * u.cutoff();
    let mut out = [vec![Complex64::default(); band], vec![Complex64::default(); band], vec![Complex64::default(); band]];
    for m in p.monomials() {
        nonzero_box(m.degree as usize, n, &mut |t| {
            let k: i64 = t.iter().sum();
            if k <= 0 {
                return;
            }
            let prod = t.iter().fold(Complex64::new(m.coeff, 0.0), |acc, &kj| acc * u.coeff(kj));
            let value = prod * Complex64::new(0.0, k as f64);
            let slot = if t.contains(&k) {
                0
            } else {
                let dominated = (0..t.len()).any(|j| {
                    let rest = t.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, x)| x.abs()).max().unwrap();
                    t[j].abs() as f64 >= c * rest as f64
                });
                if dominated {
                    1
                } else {
                    2
                }
            };
            out[slot][k as usize - 1] += value;
        });
    }
    out
}

fn criterion_6() -> Outcome {
    let polys = [
        PolyNonlinearity::monomial(1.0, 2).unwrap(),
        PolyNonlinearity::monomial(1.0, 3).unwrap(),
        PolyNonlinearity::monomial(1.0, 4).unwrap(),
        PolyNonlinearity::new(&[(1.0, 3), (1.0, 4)]).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_piece: f64 = 0.0;
    for (i, p) in polys.iter().enumerate() {
        let u = SpectralField::random_sobolev(1.0, 8, 60 + i as u64, 0.05).unwrap();
        let band = p.max_degree() as usize * u.cutoff();
        let full = dx_p(&u, p, band).map_err(|e| e.to_string())?;
        let r1 = resonant_r1(&u, p).map_err(|e| e.to_string())?;
        let r2 = resonant_r2(&u, p).map_err(|e| e.to_string())?;
        let mut hl = SpectralField::zeros(band);
        for m in p.monomials() {
            let inputs = vec![&u; m.degree as usize];
            let term = hl_apply(&inputs, c_hl(), band).map_err(|e| e.to_string())?;
            hl = &hl + &(&term * (m.coeff * m.degree as f64));
        }
        let [res, dom, hh] = enumerate_pieces(&u, p, c_hl());
        let res = SpectralField::from_positive(res).unwrap();
        let dom = SpectralField::from_positive(dom).unwrap();
        let hh = SpectralField::from_positive(hh).unwrap();
        let scale = full.sobolev_norm(0.0);
        let residual = (&(&(&(&full - &r1) - &r2) - &hl) - &hh).sobolev_norm(0.0) / scale;
        let piece = ((&(&r1 + &r2) - &res).sobolev_norm(0.0) / scale).max((&hl - &dom).sobolev_norm(0.0) / scale);
        if !(residual <= 1e-12) || !(piece <= 1e-12) {
            return Err(format!("P = {p}: residual {residual:e}, piece mismatch {piece:e}"));
        }
        worst = worst.max(residual);
        worst_piece = worst_piece.max(piece);
    }
    Ok(format!("worst residual {worst:.2e}, pieces vs enumeration {worst_piece:.2e}"))
}

fn smooth_data(n: usize, seed: u64) -> SpectralField {
    SpectralField::random_sobolev(3.0, n, seed, 0.05).unwrap()
}

fn solver_cfg(p: &PolyNonlinearity, n: usize, dt: f64, t: f64, every: usize) -> SolverConfig {
    SolverConfig {
        cutoff: n,
        dt,
        horizon: t,
        sample_every: every,
        equation: Equation::Original,
        p: p.clone(),
    }
}

fn criterion_7() -> Outcome {
    // Linear: the stepper itself, bypassing the exact linear path of simulate.
    let f = SpectralField::random_sobolev(1.0, 32, 3, 0.05).unwrap();
    let mut u = f.positive_modes().to_vec();
    let mut stepper = Stepper::new(32, 1e-3, &PolyNonlinearity::zero(), Equation::Original);
    for _ in 0..1000 {
        stepper.advance(&mut u);
    }
    let exact: Vec<Complex64> = f
        .positive_modes()
        .iter()
        .zip(1i64..)
        .map(|(c, k)| c * airy_phase(k, 1.0))
        .collect();
    let lin = SpectralField::from_positive(u).unwrap();
    let lin_err = (&lin - &SpectralField::from_positive(exact).unwrap()).sobolev_norm(0.0) / f.sobolev_norm(0.0);
    if !(lin_err <= 1e-10) {
        return Err(format!("linear run error {lin_err:e}"));
    }

    // Self-convergence on H^1 data.
    let mkdv = PolyNonlinearity::monomial(1.0, 3).unwrap();
    let g = SpectralField::random_sobolev(1.0, 32, 5, 0.05).unwrap();
    let finals: Vec<SpectralField> = [4e-4, 2e-4, 1e-4, 5e-5]
        .iter()
        .map(|&dt| simulate(&g, &solver_cfg(&mkdv, 32, dt, 1.0, usize::MAX)).unwrap().last().1.clone())
        .collect();
    let diffs: Vec<f64> = finals.windows(2).map(|w| (&w[0] - &w[1]).sobolev_norm(0.0)).collect();
    let orders: Vec<f64> = diffs.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    if orders.iter().any(|&q| !(3.2..=4.8).contains(&q)) {
        return Err(format!("observed orders {orders:?}"));
    }

    // Conservation on smooth data.
    let h = smooth_data(32, 9);
    let traj = simulate(&h, &solver_cfg(&mkdv, 32, 1e-4, 1.0, 100)).unwrap();
    let first = invariants(&traj.states()[0], &mkdv);
    let (mut dm, mut dh): (f64, f64) = (0.0, 0.0);
    for u in traj.states() {
        let inv = invariants(u, &mkdv);
        dm = dm.max((inv.mass - first.mass).abs() / first.mass.abs());
        dh = dh.max((inv.hamiltonian - first.hamiltonian).abs() / first.hamiltonian.abs());
    }
    if !(dm <= 1e-8 && dh <= 1e-8) {
        return Err(format!("drift mass {dm:e}, hamiltonian {dh:e}"));
    }
    Ok(format!(
        "linear error {lin_err:.1e}; orders {:.2}, {:.2}; drift mass {dm:.1e}, hamiltonian {dh:.1e}",
        orders[0], orders[1]
    ))
}

fn criterion_8() -> Outcome {
    let mkdv = PolyNonlinearity::monomial(1.0, 3).unwrap();
    let f = SpectralField::random_sobolev(1.0, 16, 11, 0.05).unwrap();
    let traj = simulate(&f, &solver_cfg(&mkdv, 16, 1e-4, 0.5, 50)).unwrap();
    let gauged = gauge_forward(&traj, &mkdv).map_err(|e| e.to_string())?;
    let back = gauge_inverse(&gauged, &mkdv).map_err(|e| e.to_string())?;
    let mut trip: f64 = 0.0;
    let mut norm_gap: f64 = 0.0;
    for ((u, g), b) in traj.states().iter().zip(gauged.states()).zip(back.states()) {
        trip = trip.max((b - u).sobolev_norm(1.0));
        for s in [0.0, 1.0, 2.0] {
            let (a, c) = (u.sobolev_norm(s), g.sobolev_norm(s));
            norm_gap = norm_gap.max((a - c).abs() / a);
        }
    }
    if !(trip <= 1e-9) || !(norm_gap <= 1e-13) {
        return Err(format!("round trip {trip:e}, norm gap {norm_gap:e}"));
    }
    Ok(format!("round trip {trip:.1e} in H^1, relative norm gap {norm_gap:.1e}"))
}

/// `T_NF(f, …, f)` by direct enumeration with symbol k / H over the
/// dominated tuples.
fn t_nf_oracle(n: usize, f: &SpectralField, c: f64, band: usize) -> SpectralField {
    let mut out = vec![Complex64::default(); band];
    nonzero_box(n, f.cutoff() as i64, &mut |t| {
        let k: i64 = t.iter().sum();
        if k <= 0 || k as usize > band {
            return;
        }
        let rest_max = t[1..].iter().map(|x| x.abs()).max().unwrap();
        let tail: i64 = t[1..].iter().sum();
        if tail == 0 || (t[0].abs() as f64) < c * rest_max as f64 || t[1..].contains(&k) {
            return;
        }
        let h = direct_h(t) as f64;
        let prod = t.iter().fold(Complex64::new(k as f64 / h, 0.0), |acc, &kj| acc * f.coeff(kj));
        out[k as usize - 1] += prod;
    });
    SpectralField::from_positive(out).unwrap()
}

fn criterion_9() -> Outcome {
    let mkdv = PolyNonlinearity::monomial(1.0, 3).unwrap();
    let n = 12;
    let f = SpectralField::random_sobolev(1.0, n, 3, 0.05).unwrap();
    let cfg = NormalFormConfig::for_field(n, &mkdv, c_hl());

    let w0 = w_decompose(&f, &f, 0.0, &mkdv, &cfg).map_err(|e| e.to_string())?;
    let expected = w_initial(&f, &mkdv, &cfg).map_err(|e| e.to_string())?;
    let oracle = &t_nf_oracle(3, &f, c_hl(), cfg.cutoff) * 3.0;
    let id_err = (&w0 - &expected).sobolev_norm(0.0) / expected.sobolev_norm(0.0);
    let oracle_err = (&expected - &oracle).sobolev_norm(0.0) / oracle.sobolev_norm(0.0);
    let direct = t_nf_diag(3, &f, &f, &cfg).unwrap();
    if !(id_err <= 1e-14) || !(oracle_err <= 1e-13) || direct.is_zero() {
        return Err(format!("w(0) identity {id_err:e}, enumeration {oracle_err:e}"));
    }

    let tc = 0.1;
    let mut residuals = Vec::new();
    for delta in [1e-3, 5e-4, 2.5e-4] {
        let sc = SolverConfig {
            cutoff: n,
            dt: delta / 10.0,
            horizon: tc + delta,
            sample_every: 10,
            equation: Equation::Gauged,
            p: mkdv.clone(),
        };
        let traj = simulate(&f, &sc).map_err(|e| e.to_string())?;
        let m = traj.len();
        let (times, states) = (traj.times(), traj.states());
        let wp = w_decompose(&states[m - 1], &f, times[m - 1], &mkdv, &cfg).unwrap();
        let wm = w_decompose(&states[m - 3], &f, times[m - 3], &mkdv, &cfg).unwrap();
        let lw = airy_time_derivative(&wm, &wp, times[m - 2], delta);
        let rhs = w_rhs_terms(&states[m - 2], &f, times[m - 2], &mkdv, &cfg).unwrap().sum();
        residuals.push((&lw - &rhs).sobolev_norm(0.0) / rhs.sobolev_norm(0.0));
    }
    let orders: Vec<f64> = residuals.windows(2).map(|r| (r[0] / r[1]).log2()).collect();
    let decreasing = residuals.windows(2).all(|r| r[1] < r[0]);
    let last = *orders.last().unwrap();
    if !decreasing || !(1.6..=2.4).contains(&last) {
        return Err(format!("residuals {residuals:?}, orders {orders:?}"));
    }
    Ok(format!(
        "w(0) exact to {id_err:.1e} (enumeration {oracle_err:.1e}); FD residuals {:.2e} {:.2e} {:.2e}, final order {last:.2}",
        residuals[0], residuals[1], residuals[2]
    ))
}

fn criterion_10() -> Outcome {
    let mut parts = Vec::new();
    for (name, degree, dt) in [("mKdV", 3, 5e-6), ("KdV", 2, 2.5e-5)] {
        let start = Instant::now();
        let p = PolyNonlinearity::monomial(1.0, degree).unwrap();
        let r = smoothing_scan(&SmoothingParams::new(1.0, p, 256, dt, 0.1, 7)).map_err(|e| e.to_string())?;
        within(start.elapsed(), 600)?;
        if !(r.gamma_fit >= 0.5) {
            return Err(format!("{name}: gamma_fit {}", r.gamma_fit));
        }
        parts.push(format!("{name} gamma_fit {:.3} ({:.1?})", r.gamma_fit, start.elapsed()));
    }
    Ok(format!("{}; ceiling 1", parts.join(", ")))
}

fn criterion_11() -> Outcome {
    let p = PolyNonlinearity::monomial(1.0, 3).unwrap();
    let r = growth_track(&GrowthParams::new(2.0, p, 64, 2.5e-5, 50.0, 1)).map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    write_growth_csv(&r, &mut csv).map_err(|e| e.to_string())?;
    let text = String::from_utf8(csv).unwrap();
    let parsed = parse_growth_csv(&text).map_err(|e| e.to_string())?;
    let schema_ok = parsed == r && text.lines().any(|l| l == GROWTH_HEADER);
    let svg_ok = roxmltree::Document::parse(&render_growth_plot(&r))
        .map(|d| d.root_element().has_tag_name("svg"))
        .unwrap_or(false);
    if !(r.alpha <= 1.5) || !(r.mass_drift <= 1e-6) || !(r.hamiltonian_drift <= 1e-6) || !schema_ok || !svg_ok {
        return Err(format!(
            "alpha {}, drift {:e}/{:e}, csv {schema_ok}, svg {svg_ok}",
            r.alpha, r.mass_drift, r.hamiltonian_drift
        ));
    }
    Ok(format!(
        "alpha {:.4} (ceiling {}), drift mass {:.1e} hamiltonian {:.1e}, report valid",
        r.alpha, r.ceiling, r.mass_drift, r.hamiltonian_drift
    ))
}

fn criterion_12() -> Outcome {
    let mut parts = Vec::new();
    for n in [2, 3] {
        let lo = nf_bound_ratio(n, 1.0, 5, 11, 16, c_hl()).map_err(|e| e.to_string())?;
        let hi = nf_bound_ratio(n, 1.0, 5, 11, 64, c_hl()).map_err(|e| e.to_string())?;
        let q = hi / lo;
        if !(q <= 2.0) {
            return Err(format!("n={n}: ratio(64)/ratio(16) = {q}"));
        }
        parts.push(format!("n={n}: {q:.3}"));
    }
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("dispersion identity", criterion_1),
        ("exhaustive case coverage", criterion_2),
        ("mu cancellations", criterion_3),
        ("sigma - mu symbol algebra", criterion_4),
        ("polarization", criterion_5),
        ("nonlinearity partition", criterion_6),
        ("solver", criterion_7),
        ("gauge", criterion_8),
        ("normal-form consistency", criterion_9),
        ("smoothing gain", criterion_10),
        ("growth diagnostic", criterion_11),
        ("normal-form bound stability", criterion_12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {label}: {detail} [{:.1?}]", start.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {detail} [{:.1?}]", start.elapsed());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
