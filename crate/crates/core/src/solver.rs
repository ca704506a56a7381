//! Integrating-factor RK4 for `u_t + u_xxx = ∂_x P(u)` on the Galerkin space
//! of modes `0 < |k| ≤ N`.
//!
//! In mode form `∂_t u_k = ik³ u_k + N_k(u)`; the linear part is integrated
//! exactly through `E = e^{ik³h}` (Lawson's scheme) and RK4 is applied to the
//! interaction variable `e^{-ik³t} u_k`. The truncated system conserves mass
//! and Hamiltonian exactly, so any drift comes from the time stepping.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::transform::Grid;
use crate::fourier::{airy_phase, SpectralField};
use crate::gauge::{SampleDiagnostics, Trajectory};
use crate::nonlinearity::PolyNonlinearity;

/// Which evolution the stepper integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    /// `u_t + u_xxx = ∂_x P(u)`.
    #[default]
    Original,
    /// `ũ_t + ũ_xxx = ∂_x P(ũ) − R¹[ũ]`.
    Gauged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub sample_every: usize,
    pub equation: Equation,
    pub p: PolyNonlinearity,
}

/// The guard trips once `‖u‖_{H¹}` exceeds this multiple of its initial value.
pub const BLOW_UP_FACTOR: f64 = 1e6;

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::invalid("cutoff N must be at least 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::invalid("horizon T must be positive"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk to `T / steps` so the horizon is
    /// hit exactly.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }

    pub fn effective_dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantTriple {
    /// Zero by representation.
    pub mean: f64,
    /// `∫ u² = 2π Σ_{k≠0} |c_k|²`.
    pub mass: f64,
    /// `∫ ½ u_x² + G(u)` with `G′ = P`, `G(0) = 0`.
    pub hamiltonian: f64,
}

pub fn invariants(u: &SpectralField, p: &PolyNonlinearity) -> InvariantTriple {
    let mut sq = 0.0;
    let mut grad = 0.0;
    for (i, c) in u.positive_modes().iter().enumerate() {
        let k = (i + 1) as f64;
        sq += c.norm_sqr();
        grad += k * k * c.norm_sqr();
    }
    let potential = if p.is_zero() || u.is_zero() {
        0.0
    } else {
        let band = (p.max_degree() as usize + 1) * u.cutoff();
        let mut grid = Grid::for_modes(band);
        let mut vals = vec![0.0; grid.len()];
        grid.synthesize(0.0, u.positive_modes(), &mut vals);
        vals.iter().map(|&v| p.antiderivative(v)).sum::<f64>() / vals.len() as f64
    };
    InvariantTriple {
        mean: 0.0,
        mass: 2.0 * PI * 2.0 * sq,
        hamiltonian: 2.0 * PI * (0.5 * 2.0 * grad + potential),
    }
}

/// Heuristic explicit-step bound `dt ≤ C / (N · Σ_j |a_j| d_j ‖u‖_∞^{d_j-1})`
/// with C = 1/2 and the Wiener norm standing in for sup |u|.
pub fn suggested_dt(u: &SpectralField, p: &PolyNonlinearity) -> f64 {
    let sup = u.wiener_norm();
    let rate: f64 = p
        .monomials()
        .iter()
        .map(|m| m.coeff.abs() * m.degree as f64 * sup.powi(m.degree as i32 - 1))
        .sum();
    if rate == 0.0 {
        f64::INFINITY
    } else {
        0.5 / (u.cutoff() as f64 * rate)
    }
}

/// Reusable workspace evaluating the nonlinear part of the mode equation.
struct Nonlinear {
    cutoff: usize,
    p: PolyNonlinearity,
    equation: Equation,
    grid: Grid,
    vals: Vec<f64>,
    pvals: Vec<f64>,
}

impl Nonlinear {
    fn new(cutoff: usize, p: &PolyNonlinearity, equation: Equation) -> Self {
        let grid = Grid::for_modes(p.max_degree() as usize * cutoff);
        let len = grid.len();
        Nonlinear {
            cutoff,
            p: p.clone(),
            equation,
            grid,
            vals: vec![0.0; len],
            pvals: vec![0.0; len],
        }
    }

    /// `Σ_j a_j d_j ⨍ u^{d_j-1}` from the point values of the last synthesis.
    fn phase_velocity_from_grid(&self) -> f64 {
        let len = self.vals.len() as f64;
        self.p
            .active()
            .filter(|m| m.degree > 2)
            .map(|m| {
                let mean = self.vals.iter().map(|v| v.powi(m.degree as i32 - 1)).sum::<f64>() / len;
                m.coeff * m.degree as f64 * mean
            })
            .sum()
    }

    fn eval(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        if self.p.is_zero() {
            out.iter_mut().for_each(|z| *z = Complex64::default());
            return;
        }
        self.grid.synthesize(0.0, u, &mut self.vals);
        for (pv, &v) in self.pvals.iter_mut().zip(&self.vals) {
            *pv = self.p.eval(v);
        }
        let (_, modes) = self.grid.analyze(&self.pvals, self.cutoff);
        let shift = match self.equation {
            Equation::Original => 0.0,
            Equation::Gauged => self.phase_velocity_from_grid(),
        };
        for (i, (o, m)) in out.iter_mut().zip(modes).enumerate() {
            let ik = Complex64::new(0.0, (i + 1) as f64);
            *o = ik * (m - u[i] * shift);
        }
    }
}

/// Lawson IFRK4 stepper at fixed step size.
pub struct Stepper {
    nl: Nonlinear,
    dt: f64,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Stepper {
    pub fn new(cutoff: usize, dt: f64, p: &PolyNonlinearity, equation: Equation) -> Self {
        let full = (1..=cutoff as i64).map(|k| airy_phase(k, dt)).collect();
        let half = (1..=cutoff as i64).map(|k| airy_phase(k, 0.5 * dt)).collect();
        let zeros = vec![Complex64::default(); cutoff];
        Stepper {
            nl: Nonlinear::new(cutoff, p, equation),
            dt,
            full,
            half,
            k: [zeros.clone(), zeros.clone(), zeros.clone(), zeros.clone()],
            tmp: zeros,
        }
    }

    /// Advances the positive modes `u` by one step in place.
    pub fn advance(&mut self, u: &mut [Complex64]) {
        let h = self.dt;
        let n = u.len();
        let [k1, k2, k3, k4] = &mut self.k;
        self.nl.eval(u, k1);
        for i in 0..n {
            self.tmp[i] = self.half[i] * (u[i] + 0.5 * h * k1[i]);
        }
        self.nl.eval(&self.tmp, k2);
        for i in 0..n {
            self.tmp[i] = self.half[i] * u[i] + 0.5 * h * k2[i];
        }
        self.nl.eval(&self.tmp, k3);
        for i in 0..n {
            self.tmp[i] = self.full[i] * u[i] + h * self.half[i] * k3[i];
        }
        self.nl.eval(&self.tmp, k4);
        for i in 0..n {
            u[i] = self.full[i] * u[i]
                + h / 6.0 * (self.full[i] * k1[i] + 2.0 * self.half[i] * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

/// One IFRK4 step of the original equation truncated to `cutoff` modes.
pub fn step(u: &SpectralField, dt: f64, p: &PolyNonlinearity, cutoff: usize) -> Result<SpectralField> {
    if !(dt.is_finite()) {
        return Err(Error::invalid("dt must be finite"));
    }
    let mut modes = u.with_cutoff(cutoff).positive_modes().to_vec();
    Stepper::new(cutoff, dt, p, Equation::Original).advance(&mut modes);
    SpectralField::from_positive(modes).map_err(|_| Error::BlowUp {
        time: dt,
        last_good_time: 0.0,
        norm: f64::NAN,
    })
}

fn diagnostics(u: &SpectralField, p: &PolyNonlinearity) -> Result<SampleDiagnostics> {
    let inv = invariants(u, p);
    Ok(SampleDiagnostics {
        mass: inv.mass,
        hamiltonian: inv.hamiltonian,
        phase_velocity: crate::nonlinearity::resonant_velocity(u, p)?,
    })
}

/// Integrates from `f` (truncated to the configured cutoff) and records
/// samples every `sample_every` steps plus the final time. With P ≡ 0 the
/// states are the Airy group applied to `f` directly. The phase column
/// holds the cumulative-trapezoid gauge phase of the samples.
pub fn simulate(f: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = cfg.steps();
    let dt = cfg.effective_dt();
    let f = f.with_cutoff(cfg.cutoff);
    let mut u = f.positive_modes().to_vec();
    let mut stepper = Stepper::new(cfg.cutoff, dt, &cfg.p, cfg.equation);
    let h1 = |m: &[Complex64]| {
        let s: f64 = m
            .iter()
            .enumerate()
            .map(|(i, c)| (1.0 + ((i + 1) * (i + 1)) as f64) * c.norm_sqr())
            .sum();
        (2.0 * s).sqrt()
    };
    let limit = BLOW_UP_FACTOR * h1(&u);

    let first = SpectralField::from_positive(u.clone())?;
    let mut times = vec![0.0];
    let mut diags = vec![diagnostics(&first, &cfg.p)?];
    let mut states = vec![first];
    let mut last_good = 0.0;
    for i in 1..=steps {
        let t = i as f64 * dt;
        if cfg.p.is_zero() {
            u.copy_from_slice(f.free_flow(t).positive_modes());
        } else {
            stepper.advance(&mut u);
        }
        let norm = h1(&u);
        if !norm.is_finite() || (limit > 0.0 && norm > limit) {
            return Err(Error::BlowUp {
                time: t,
                last_good_time: last_good,
                norm,
            });
        }
        last_good = t;
        if i % cfg.sample_every == 0 || i == steps {
            let field = SpectralField::from_positive(u.clone())?;
            diags.push(diagnostics(&field, &cfg.p)?);
            states.push(field);
            times.push(t);
        }
    }
    let mut phase = vec![0.0; times.len()];
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        phase[i] = phase[i - 1] + 0.5 * dt * (diags[i].phase_velocity + diags[i - 1].phase_velocity);
    }
    Trajectory::with_diagnostics(times, states, phase, diags)
}
