//! Mean-zero real trigonometric polynomials on 𝕋 = [0, 2π).
//!
//! A [`SpectralField`] stores the modes c_1..c_N of
//! `u(x) = Σ_{0<|k|≤N} c_k e^{ikx}`; negative modes are the conjugates
//! c_{-k} = conj(c_k), so real-valuedness holds by construction and the
//! zero mode is absent. Products u^p are not mean-zero and live in a
//! [`PaddedField`].
//!
//! Sobolev norms use the weight ⟨k⟩ = (1 + k²)^{1/2} and omit the 2π volume
//! factor of ∫_𝕋: `‖u‖²_{H^s} = Σ_{k≠0} ⟨k⟩^{2s} |c_k|²`.

pub mod transform;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use transform::Grid;

/// Largest band a padded product may occupy unless a caller asks for more.
pub const DEFAULT_MAX_MODES: usize = 1 << 20;

/// Regularity index of a Sobolev norm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevIndex(pub f64);

impl From<f64> for SobolevIndex {
    fn from(s: f64) -> Self {
        SobolevIndex(s)
    }
}

/// `⟨k⟩^{2s}`.
pub fn japanese_weight_sq(k: i64, s: f64) -> f64 {
    (1.0 + (k as f64) * (k as f64)).powf(s)
}

/// Frequency band selected by [`SpectralField::project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    AtMost(usize),
    Above(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    modes: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(cutoff: usize) -> Self {
        SpectralField {
            modes: vec![Complex64::default(); cutoff],
        }
    }

    /// Field from its positive modes `c_1..c_N`.
    pub fn from_positive(modes: Vec<Complex64>) -> Result<Self> {
        if modes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("field modes"));
        }
        Ok(SpectralField { modes })
    }

    /// Builds a field from `(k, c_k)` pairs. A mode given without its mirror
    /// gets the conjugate synthesized; a mirror pair must be conjugate.
    pub fn from_modes(entries: &[(i64, Complex64)]) -> Result<Self> {
        let mut table: BTreeMap<i64, Complex64> = BTreeMap::new();
        for &(k, c) in entries {
            if k == 0 {
                return Err(Error::ZeroMode);
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite("field modes"));
            }
            if table.insert(k, c).is_some() {
                return Err(Error::DuplicateMode(k));
            }
        }
        let cutoff = table.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut modes = vec![Complex64::default(); cutoff];
        for (&k, &c) in &table {
            let idx = k.unsigned_abs() as usize - 1;
            if k > 0 {
                if let Some(&mirror) = table.get(&-k) {
                    let tol = 1e-14 * (1.0 + c.norm());
                    if (mirror - c.conj()).norm() > tol {
                        return Err(Error::ConjugateMismatch(k));
                    }
                }
                modes[idx] = c;
            } else if !table.contains_key(&-k) {
                modes[idx] = c.conj();
            }
        }
        Ok(SpectralField { modes })
    }

    /// Mode cutoff N.
    pub fn cutoff(&self) -> usize {
        self.modes.len()
    }

    /// c_k for any integer k; zero outside the band and at k = 0.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        if idx == 0 || idx > self.modes.len() {
            return Complex64::default();
        }
        let c = self.modes[idx - 1];
        if k > 0 {
            c
        } else {
            c.conj()
        }
    }

    /// c_1..c_N.
    pub fn positive_modes(&self) -> &[Complex64] {
        &self.modes
    }

    /// All nonzero-index modes `(k, c_k)` with k ascending from -N to N.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.modes.len() as i64;
        (-n..=n).filter(|&k| k != 0).map(move |k| (k, self.coeff(k)))
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|c| *c == Complex64::default())
    }

    /// Same field with cutoff `m`; modes above `m` are dropped.
    pub fn with_cutoff(&self, m: usize) -> Self {
        let mut modes = self.modes.clone();
        modes.resize(m, Complex64::default());
        SpectralField { modes }
    }

    /// Applies `f(k, c_k)` to every positive mode; the caller guarantees the
    /// map commutes with conjugation so the mirror modes stay consistent.
    pub fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i as i64 + 1, c))
            .collect();
        SpectralField { modes }
    }

    /// `( Σ_{k≠0} ⟨k⟩^{2s} |c_k|² )^{1/2}`, summed in increasing k.
    pub fn sobolev_norm(&self, s: impl Into<SobolevIndex>) -> f64 {
        let s = s.into().0;
        let sum: f64 = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, c)| japanese_weight_sq(i as i64 + 1, s) * c.norm_sqr())
            .sum();
        (2.0 * sum).sqrt()
    }

    /// Σ_{k≠0} |c_k| (the Wiener norm, an upper bound for sup |u|).
    pub fn wiener_norm(&self) -> f64 {
        2.0 * self.modes.iter().map(|c| c.norm()).sum::<f64>()
    }

    /// Keeps modes inside `band` and zeroes the rest.
    pub fn project(&self, band: Band) -> Self {
        self.map_modes(|k, c| {
            let keep = match band {
                Band::AtMost(m) => k as usize <= m,
                Band::Above(m) => k as usize > m,
            };
            if keep {
                c
            } else {
                Complex64::default()
            }
        })
    }

    /// Airy group solving ∂_t u + ∂_x³ u = 0: c_k ↦ c_k e^{ik³t}.
    pub fn free_flow(&self, t: f64) -> Self {
        self.map_modes(|k, c| c * airy_phase(k, t))
    }

    /// Spatial translation x ↦ x + h: c_k ↦ c_k e^{ikh}.
    pub fn translate(&self, h: f64) -> Self {
        self.map_modes(|k, c| c * Complex64::from_polar(1.0, k as f64 * h))
    }

    /// ∂_x: c_k ↦ ik c_k.
    pub fn derivative(&self) -> Self {
        self.map_modes(|k, c| c * Complex64::new(0.0, k as f64))
    }

    /// Random data exactly at the H^s threshold:
    /// `c_k = ⟨k⟩^{-s-1/2-δ} e^{iθ_k}` with θ_k uniform on [0, 2π), drawn in
    /// increasing k from a ChaCha8 stream seeded by `seed`.
    pub fn random_sobolev(
        s: impl Into<SobolevIndex>,
        cutoff: usize,
        seed: u64,
        delta: f64,
    ) -> Result<Self> {
        let s = s.into().0;
        if cutoff == 0 {
            return Err(Error::invalid("random_sobolev needs N >= 1"));
        }
        if !(delta > 0.0) {
            return Err(Error::invalid("random_sobolev needs delta > 0"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let exponent = -(s + 0.5 + delta);
        let modes = (1..=cutoff as i64)
            .map(|k| {
                let theta = rng.gen::<f64>() * 2.0 * PI;
                let amp = (1.0 + (k * k) as f64).powf(0.5 * exponent);
                Complex64::from_polar(amp, theta)
            })
            .collect();
        Ok(SpectralField { modes })
    }

    /// Exact Fourier modes of u^p (band pN) computed on a zero-padded grid.
    pub fn power(&self, p: u32) -> Result<PaddedField> {
        self.power_with_budget(p, DEFAULT_MAX_MODES)
    }

    pub fn power_with_budget(&self, p: u32, max_modes: usize) -> Result<PaddedField> {
        if p == 0 {
            return Err(Error::invalid("power needs p >= 1"));
        }
        let band = (p as usize)
            .checked_mul(self.cutoff())
            .filter(|&b| b <= max_modes)
            .ok_or(Error::BudgetExceeded {
                what: "padded power",
                needed: p as u128 * self.cutoff() as u128,
                limit: max_modes as u128,
            })?;
        if p == 1 {
            return Ok(PaddedField {
                mean: 0.0,
                modes: self.modes.clone(),
            });
        }
        let mut grid = Grid::for_modes(band);
        let mut vals = vec![0.0; grid.len()];
        grid.synthesize(0.0, &self.modes, &mut vals);
        for v in vals.iter_mut() {
            *v = v.powi(p as i32);
        }
        let (mean, modes) = grid.analyze(&vals, band);
        Ok(PaddedField { mean, modes })
    }
}

/// `e^{ik³t}` with the cube formed in exact integer arithmetic.
pub fn airy_phase(k: i64, t: f64) -> Complex64 {
    let k3 = (k as i128).pow(3) as f64;
    Complex64::from_polar(1.0, k3 * t)
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        let n = self.cutoff().max(rhs.cutoff());
        let modes = (1..=n as i64).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        SpectralField { modes }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let n = self.cutoff().max(rhs.cutoff());
        let modes = (1..=n as i64).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        SpectralField { modes }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, a: f64) -> SpectralField {
        self.map_modes(|_, c| c * a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;

    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

/// Real trigonometric polynomial that may carry a zero mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedField {
    mean: f64,
    modes: Vec<Complex64>,
}

impl PaddedField {
    pub fn new(mean: f64, modes: Vec<Complex64>) -> Self {
        PaddedField { mean, modes }
    }

    pub fn cutoff(&self) -> usize {
        self.modes.len()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k == 0 {
            return Complex64::new(self.mean, 0.0);
        }
        let idx = k.unsigned_abs() as usize;
        if idx > self.modes.len() {
            return Complex64::default();
        }
        let c = self.modes[idx - 1];
        if k > 0 {
            c
        } else {
            c.conj()
        }
    }

    pub fn positive_modes(&self) -> &[Complex64] {
        &self.modes
    }

    /// Drops the zero mode.
    pub fn into_mean_zero(self) -> SpectralField {
        SpectralField { modes: self.modes }
    }
}

/// Dyadic block profile of a field: for each complete block [2^j, 2^{j+1})
/// inside the band with j ≥ `j_min`, the pair (ln of the block's geometric
/// centre, ln of the RMS modulus over the block). Blocks with zero energy
/// are skipped.
pub fn dyadic_profile(u: &SpectralField, j_min: u32) -> Vec<(f64, f64)> {
    let n = u.cutoff();
    let mut out = Vec::new();
    let mut j = j_min;
    loop {
        let lo = 1usize << j;
        let hi = lo << 1;
        if hi - 1 > n {
            break;
        }
        let energy: f64 = u.positive_modes()[lo - 1..hi - 1]
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        let rms = (energy / lo as f64).sqrt();
        if rms > 0.0 {
            let centre = lo as f64 * std::f64::consts::SQRT_2;
            out.push((centre.ln(), rms.ln()));
        }
        j += 1;
    }
    out
}
