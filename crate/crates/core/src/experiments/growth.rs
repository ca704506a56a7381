use rayon::prelude::*;

use super::{sample_stride, RunMeta};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::fourier::{Band, SpectralField};
use crate::nonlinearity::PolyNonlinearity;
use crate::solver::{simulate, Equation, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthParams {
    pub s: f64,
    pub p: PolyNonlinearity,
    pub cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub samples: usize,
    /// Window length T₀; sample t belongs to window n = ⌊t / T₀⌋.
    pub window: f64,
    /// Multiplies the random data.
    pub amplitude: f64,
    pub delta: f64,
    /// ε in the reported ceiling `s − 1 + ε`.
    pub epsilon: f64,
}

impl GrowthParams {
    pub fn new(s: f64, p: PolyNonlinearity, cutoff: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        GrowthParams {
            s,
            p,
            cutoff,
            dt,
            horizon,
            seed,
            samples: 200,
            window: 1.0,
            amplitude: 1.0,
            delta: 0.05,
            epsilon: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s >= 1.0) {
            return Err(Error::invalid("growth tracking needs s >= 1"));
        }
        if !(self.window > 0.0) || !self.window.is_finite() {
            return Err(Error::invalid("window must be positive"));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::invalid("amplitude must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.samples < 2 {
            return Err(Error::invalid("growth tracking needs at least 2 samples"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub t: f64,
    pub hs_norm: f64,
    pub window_n: u64,
    /// ‖P_{≤n} u‖_{H^s}.
    pub low_norm: f64,
    /// ‖P_{>n} u‖_{H^s}.
    pub high_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub meta: RunMeta,
    pub s: f64,
    pub window: f64,
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of log ‖u‖_{H^s} against log ⟨t⟩ over the
    /// final half of the run.
    pub alpha: f64,
    /// `s − 1 + ε`.
    pub ceiling: f64,
    /// Largest relative deviation of the mass from its initial value.
    pub mass_drift: f64,
    pub hamiltonian_drift: f64,
}

fn relative_drift(values: impl Iterator<Item = f64>, reference: f64) -> f64 {
    let scale = reference.abs().max(f64::MIN_POSITIVE);
    values.map(|v| (v - reference).abs() / scale).fold(0.0, f64::max)
}

pub fn growth_track(params: &GrowthParams) -> Result<GrowthReport> {
    params.validate()?;
    let f = &SpectralField::random_sobolev(params.s, params.cutoff, params.seed, params.delta)? * params.amplitude;
    let cfg = SolverConfig {
        cutoff: params.cutoff,
        dt: params.dt,
        horizon: params.horizon,
        sample_every: sample_stride(params.horizon, params.dt, params.samples),
        equation: Equation::Original,
        p: params.p.clone(),
    };
    let traj = simulate(&f, &cfg)?;
    let s = params.s;
    let rows: Vec<GrowthRow> = traj
        .times()
        .par_iter()
        .zip(traj.states())
        .map(|(&t, u)| {
            let n = (t / params.window).floor() as u64;
            let m = n.min(params.cutoff as u64) as usize;
            GrowthRow {
                t,
                hs_norm: u.sobolev_norm(s),
                window_n: n,
                low_norm: u.project(Band::AtMost(m)).sobolev_norm(s),
                high_norm: u.project(Band::Above(m)).sobolev_norm(s),
            }
        })
        .collect();
    if rows.iter().any(|r| !r.hs_norm.is_finite()) {
        return Err(Error::NonFinite("growth norm"));
    }

    let late: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= 0.5 * params.horizon)
        .map(|r| ((1.0 + r.t * r.t).sqrt().ln(), r.hs_norm.ln()))
        .collect();
    let alpha = fit_line(&late).map_or(f64::NAN, |(m, _)| m);

    let diags = traj.diagnostics();
    Ok(GrowthReport {
        meta: RunMeta::new(params.cutoff, cfg.effective_dt(), params.horizon, params.seed, &params.p),
        s,
        window: params.window,
        rows,
        alpha,
        ceiling: s - 1.0 + params.epsilon,
        mass_drift: relative_drift(diags.iter().map(|d| d.mass), diags[0].mass),
        hamiltonian_drift: relative_drift(diags.iter().map(|d| d.hamiltonian), diags[0].hamiltonian),
    })
}
