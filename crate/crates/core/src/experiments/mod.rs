//! Scripted studies: nonlinear smoothing gain and long-time Sobolev growth.

mod growth;
mod plot;
mod report;
mod smoothing;

pub use growth::{growth_track, GrowthParams, GrowthReport, GrowthRow};
pub use plot::{render_growth_plot, render_smoothing_plot, LineChart, Series};
pub use report::{
    parse_growth_csv, parse_smoothing_csv, write_diagnostics_csv, write_growth_csv,
    write_smoothing_csv, write_trajectory_csv, GROWTH_HEADER, SMOOTHING_HEADER,
};
pub use smoothing::{smoothing_scan, SmoothingParams, SmoothingReport, SmoothingRow, GAIN_SENTINEL, MIN_BLOCKS};

use crate::nonlinearity::PolyNonlinearity;

/// Settings shared by every run, echoed into report headers.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub p: String,
}

impl RunMeta {
    pub(crate) fn new(cutoff: usize, dt: f64, horizon: f64, seed: u64, p: &PolyNonlinearity) -> Self {
        RunMeta {
            cutoff,
            dt,
            horizon,
            seed,
            p: if p.is_zero() { "0".into() } else { p.to_string() },
        }
    }
}

/// Number of steps between samples so that roughly `samples` intervals are
/// recorded.
pub(crate) fn sample_stride(horizon: f64, dt: f64, samples: usize) -> usize {
    let steps = ((horizon / dt).round() as usize).max(1);
    (steps / samples.max(1)).max(1)
}
