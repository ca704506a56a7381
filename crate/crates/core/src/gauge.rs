//! Gauge (phase-shift) transform removing the resonant term R¹.
//!
//! With `Φ(t) = ∫_0^t Σ_j a_j d_j ⨍ u^{d_j-1}(t′) dt′` the gauged modes are
//! `ũ_k(t) = u_k(t) e^{-ikΦ(t)}`, i.e. ũ(t, x) = u(t, x − Φ(t)); the inverse
//! is the translation u(t) = ũ(t, · + Φ(t)). Spatial means of powers are
//! translation invariant, so Φ can be computed from either trajectory.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::transform::Grid;
use crate::fourier::SpectralField;
use crate::nonlinearity::{resonant_velocity, PolyNonlinearity};

/// Largest tolerated imaginary part of a zero mode.
pub const MEAN_IMAG_TOL: f64 = 1e-13;

/// `∫_𝕋 u^p dx = 2π (u^p)_0`.
pub fn mean_power(u: &SpectralField, p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::invalid("mean_power needs p >= 1"));
    }
    if p == 1 {
        return Ok(0.0);
    }
    let band = p as usize * u.cutoff();
    let mut grid = Grid::for_modes(band);
    let mut vals = vec![0.0; grid.len()];
    grid.synthesize(0.0, u.positive_modes(), &mut vals);
    for v in vals.iter_mut() {
        *v = v.powi(p as i32);
    }
    let (mean, _) = grid.analyze(&vals, 0);
    let imag = grid.last_mean_imag();
    if imag.abs() > MEAN_IMAG_TOL * (1.0 + mean.abs()) {
        return Err(Error::NonRealMean { power: p, imag });
    }
    Ok(2.0 * PI * mean)
}

/// Per-sample conserved quantities and the means feeding the gauge phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleDiagnostics {
    pub mass: f64,
    pub hamiltonian: f64,
    /// `Σ_j a_j d_j ⨍ u^{d_j-1}`.
    pub phase_velocity: f64,
}

/// Time-ordered samples with the accumulated gauge phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<SpectralField>,
    phase: Vec<f64>,
    diagnostics: Vec<SampleDiagnostics>,
}

impl Trajectory {
    /// Builds a trajectory with zero phase; times must start at 0 and
    /// increase strictly.
    pub fn new(times: Vec<f64>, states: Vec<SpectralField>) -> Result<Self> {
        let n = times.len();
        let diagnostics = vec![SampleDiagnostics::default(); n];
        Self::with_diagnostics(times, states, vec![0.0; n], diagnostics)
    }

    pub fn with_diagnostics(
        times: Vec<f64>,
        states: Vec<SpectralField>,
        phase: Vec<f64>,
        diagnostics: Vec<SampleDiagnostics>,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("trajectory needs at least one sample"));
        }
        if states.len() != times.len() || phase.len() != times.len() || diagnostics.len() != times.len()
        {
            return Err(Error::invalid("trajectory columns differ in length"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneTimes);
        }
        if phase[0] != 0.0 {
            return Err(Error::invalid("trajectory phase must start at 0"));
        }
        Ok(Trajectory {
            times,
            states,
            phase,
            diagnostics,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn diagnostics(&self) -> &[SampleDiagnostics] {
        &self.diagnostics
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, &SpectralField) {
        let i = self.times.len() - 1;
        (self.times[i], &self.states[i])
    }

    fn with_states(&self, states: Vec<SpectralField>, phase: Vec<f64>) -> Self {
        Trajectory {
            times: self.times.clone(),
            states,
            phase,
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// `Φ(t_i)` by cumulative trapezoid of the phase velocity over the samples.
pub fn phase_integral(times: &[f64], states: &[SpectralField], p: &PolyNonlinearity) -> Result<Vec<f64>> {
    if times.len() != states.len() || times.is_empty() {
        return Err(Error::invalid("phase integral needs matching, nonempty samples"));
    }
    if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTimes);
    }
    let rates: Vec<f64> = states
        .par_iter()
        .map(|u| resonant_velocity(u, p))
        .collect::<Result<_>>()?;
    let mut phi = Vec::with_capacity(times.len());
    phi.push(0.0);
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        phi.push(phi[i - 1] + 0.5 * dt * (rates[i] + rates[i - 1]));
    }
    Ok(phi)
}

/// u ↦ ũ with Φ computed from the stored states.
pub fn gauge_forward(traj: &Trajectory, p: &PolyNonlinearity) -> Result<Trajectory> {
    let phi = phase_integral(&traj.times, &traj.states, p)?;
    let states = traj
        .states
        .par_iter()
        .zip(&phi)
        .map(|(u, &f)| u.translate(-f))
        .collect();
    Ok(traj.with_states(states, phi))
}

/// ũ ↦ u by translating each sample by Φ recomputed from ũ.
pub fn gauge_inverse(traj: &Trajectory, p: &PolyNonlinearity) -> Result<Trajectory> {
    let phi = phase_integral(&traj.times, &traj.states, p)?;
    let states = traj
        .states
        .par_iter()
        .zip(&phi)
        .map(|(u, &f)| u.translate(f))
        .collect();
    Ok(traj.with_states(states, phi))
}
