//! Physical-space sampling on uniform grids of [0, 2π).
//!
//! A trigonometric polynomial with modes |k| ≤ M is recovered exactly from
//! any grid of length L ≥ 2M + 1, so products of band-limited fields can be
//! formed pointwise without aliasing as long as the grid is long enough for
//! the product's band.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Smallest power of two that resolves modes |k| ≤ `max_mode` exactly.
pub fn grid_len(max_mode: usize) -> usize {
    (2 * max_mode + 1).next_power_of_two().max(4)
}

/// Forward/inverse transform pair of a fixed length with reusable scratch.
pub struct Grid {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Grid {
    pub fn new(len: usize) -> Self {
        let (forward, inverse) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(len), p.plan_fft_inverse(len))
        });
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Grid {
            len,
            forward,
            inverse,
            buf: vec![Complex64::default(); len],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    /// Grid able to hold modes up to `max_mode` without aliasing.
    pub fn for_modes(max_mode: usize) -> Self {
        Grid::new(grid_len(max_mode))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Point values of `mean + Σ_{1≤|k|≤M} c_k e^{ikx}` at x_j = 2πj/L,
    /// where `positive[k-1] = c_k` and negative modes are conjugates.
    pub fn synthesize(&mut self, mean: f64, positive: &[Complex64], out: &mut [f64]) {
        assert!(2 * positive.len() < self.len, "grid too short for band");
        assert_eq!(out.len(), self.len);
        self.buf.iter_mut().for_each(|z| *z = Complex64::default());
        self.buf[0] = Complex64::new(mean, 0.0);
        for (i, &c) in positive.iter().enumerate() {
            let k = i + 1;
            self.buf[k] = c;
            self.buf[self.len - k] = c.conj();
        }
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for (o, z) in out.iter_mut().zip(&self.buf) {
            *o = z.re;
        }
    }

    /// Fourier coefficients (mean, c_1..c_M) of real point values.
    pub fn analyze(&mut self, values: &[f64], max_mode: usize) -> (f64, Vec<Complex64>) {
        assert_eq!(values.len(), self.len);
        assert!(2 * max_mode < self.len, "grid too short for band");
        for (z, &v) in self.buf.iter_mut().zip(values) {
            *z = Complex64::new(v, 0.0);
        }
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.len as f64;
        let mean = self.buf[0].re * scale;
        let modes = self.buf[1..=max_mode].iter().map(|z| z * scale).collect();
        (mean, modes)
    }

    /// Zero-mode imaginary part left over by the last `analyze` call.
    pub(crate) fn last_mean_imag(&self) -> f64 {
        self.buf[0].im / self.len as f64
    }
}
