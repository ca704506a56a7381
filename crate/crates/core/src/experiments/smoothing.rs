use rayon::prelude::*;

use super::{sample_stride, RunMeta};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::fourier::{dyadic_profile, SpectralField};
use crate::nonlinearity::PolyNonlinearity;
use crate::solver::{simulate, Equation, SolverConfig};

/// Reported gain when the nonlinearity vanishes and w̃ ≡ 0.
pub const GAIN_SENTINEL: f64 = f64::INFINITY;

/// Fewest dyadic blocks accepted for a tail-slope fit.
pub const MIN_BLOCKS: usize = 5;

/// Lowest dyadic block `[2^j, 2^{j+1})` entering the tail fit.
const FIRST_BLOCK: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingParams {
    pub s: f64,
    pub p: PolyNonlinearity,
    pub cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub gammas: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Offset δ of the random data exponent `-s-1/2-δ`.
    pub delta: f64,
}

impl SmoothingParams {
    pub fn new(s: f64, p: PolyNonlinearity, cutoff: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        SmoothingParams {
            s,
            p,
            cutoff,
            dt,
            horizon,
            gammas: vec![0.25, 0.5, 0.75],
            seed,
            samples: 10,
            delta: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.5) {
            return Err(Error::invalid("smoothing needs s > 1/2"));
        }
        if self.gammas.iter().any(|g| !g.is_finite()) || self.gammas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("gamma grid must be finite and increasing"));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        if fit_blocks(self.cutoff) < MIN_BLOCKS {
            return Err(Error::invalid(format!(
                "cutoff {} resolves {} dyadic blocks, need {MIN_BLOCKS}",
                self.cutoff,
                fit_blocks(self.cutoff)
            )));
        }
        Ok(())
    }
}

/// Blocks `[2^j, 2^{j+1})`, j ≥ 1, lying inside the resolved band |k| < N/2.
fn fit_blocks(cutoff: usize) -> usize {
    let band = cutoff / 2;
    (FIRST_BLOCK..).take_while(|&j| (2usize << j) - 1 <= band).count()
}

/// One sample: ‖w̃(t)‖_{H^{s+γ}} per γ and the two tail slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingRow {
    pub t: f64,
    pub norms: Vec<f64>,
    pub slope_u: f64,
    pub slope_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub meta: RunMeta,
    pub s: f64,
    pub gammas: Vec<f64>,
    pub rows: Vec<SmoothingRow>,
    pub gamma_fit: f64,
}

impl SmoothingReport {
    pub fn is_sentinel(&self) -> bool {
        self.gamma_fit == GAIN_SENTINEL
    }
}

/// Log-log slope of the block profile over the resolved band, NaN when fewer
/// than two blocks carry energy.
fn tail_slope(u: &SpectralField) -> f64 {
    let profile = dyadic_profile(&u.with_cutoff(u.cutoff() / 2), FIRST_BLOCK);
    fit_line(&profile).map_or(f64::NAN, |(m, _)| m)
}

/// Runs the gauged equation from `random_sobolev(s, N, seed)` and measures
/// the regularity gap between ũ(t) and w̃(t), its distance from the free
/// Airy evolution of f.
pub fn smoothing_scan(params: &SmoothingParams) -> Result<SmoothingReport> {
    params.validate()?;
    let f = SpectralField::random_sobolev(params.s, params.cutoff, params.seed, params.delta)?;
    let cfg = SolverConfig {
        cutoff: params.cutoff,
        dt: params.dt,
        horizon: params.horizon,
        sample_every: sample_stride(params.horizon, params.dt, params.samples),
        equation: Equation::Gauged,
        p: params.p.clone(),
    };
    let traj = simulate(&f, &cfg)?;
    let rows: Vec<SmoothingRow> = traj
        .times()
        .par_iter()
        .zip(traj.states())
        .map(|(&t, u)| {
            let w = u - &f.free_flow(t);
            SmoothingRow {
                t,
                norms: params.gammas.iter().map(|g| w.sobolev_norm(params.s + g)).collect(),
                slope_u: tail_slope(u),
                slope_w: tail_slope(&w),
            }
        })
        .collect();

    let gamma_fit = if params.p.is_zero() {
        GAIN_SENTINEL
    } else {
        let late: Vec<f64> = rows
            .iter()
            .filter(|r| r.t >= 0.5 * params.horizon)
            .map(|r| r.slope_u - r.slope_w)
            .filter(|g| g.is_finite())
            .collect();
        if late.is_empty() {
            f64::NAN
        } else {
            late.iter().sum::<f64>() / late.len() as f64
        }
    };
    Ok(SmoothingReport {
        meta: RunMeta::new(params.cutoff, cfg.effective_dt(), params.horizon, params.seed, &params.p),
        s: params.s,
        gammas: params.gammas.clone(),
        rows,
        gamma_fit,
    })
}
