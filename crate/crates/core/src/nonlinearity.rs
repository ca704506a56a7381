//! The nonlinearity ∂_x P(u) and its resonant / non-resonant decomposition
//!
//! `∂_x P(u) = R¹[u] + R²[u] + Σ_j a_j d_j HL^{d_j}[u] + HH[u]`
//!
//! * R¹: the part with one interior frequency equal to the output and the
//!   remaining ones summing to zero, factored through the spatial means of
//!   u^{d-1} (removed by the gauge transform);
//! * R²: the rest of the resonant sum R_k (overlaps of several resonant slots);
//! * HL^d: non-resonant tuples whose first slot dominates,
//!   `|k_1| ≥ C_hl · max_{j≥2} |k_j|` with `k_2 + … + k_d ≠ 0`;
//! * HH: everything else, defined by subtraction.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::transform::Grid;
use crate::fourier::SpectralField;
use crate::gauge::mean_power;
use crate::tuples::{self, for_each_in_box, for_each_with_sum, DEFAULT_TUPLE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub degree: u32,
}

/// `P(u) = Σ_j a_j u^{d_j}` with degrees ≥ 2, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, u32)>", into = "Vec<(f64, u32)>")]
pub struct PolyNonlinearity {
    monomials: Vec<Monomial>,
}

impl TryFrom<Vec<(f64, u32)>> for PolyNonlinearity {
    type Error = Error;

    /// An empty list is the zero nonlinearity.
    fn try_from(terms: Vec<(f64, u32)>) -> Result<Self> {
        if terms.is_empty() {
            return Ok(PolyNonlinearity::zero());
        }
        PolyNonlinearity::new(&terms)
    }
}

impl From<PolyNonlinearity> for Vec<(f64, u32)> {
    fn from(p: PolyNonlinearity) -> Self {
        p.monomials.iter().map(|m| (m.coeff, m.degree)).collect()
    }
}

impl PolyNonlinearity {
    pub fn new(terms: &[(f64, u32)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("P needs at least one monomial"));
        }
        for w in terms.windows(2) {
            if w[1].1 <= w[0].1 {
                return Err(Error::invalid("monomial degrees must be strictly increasing"));
            }
        }
        if terms[0].1 < 2 {
            return Err(Error::invalid("monomial degrees must be at least 2"));
        }
        if terms.iter().any(|t| !t.0.is_finite()) {
            return Err(Error::NonFinite("monomial coefficients"));
        }
        Ok(PolyNonlinearity {
            monomials: terms
                .iter()
                .map(|&(coeff, degree)| Monomial { coeff, degree })
                .collect(),
        })
    }

    /// `a u^d`.
    pub fn monomial(a: f64, d: u32) -> Result<Self> {
        Self::new(&[(a, d)])
    }

    /// P ≡ 0, stored as `0 · u²`.
    pub fn zero() -> Self {
        PolyNonlinearity {
            monomials: vec![Monomial {
                coeff: 0.0,
                degree: 2,
            }],
        }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn max_degree(&self) -> u32 {
        self.monomials.last().map(|m| m.degree).unwrap_or(2)
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.iter().all(|m| m.coeff == 0.0)
    }

    /// Monomials with nonzero coefficient.
    pub(crate) fn active(&self) -> impl Iterator<Item = &Monomial> {
        self.monomials.iter().filter(|m| m.coeff != 0.0)
    }

    /// P(z).
    pub fn eval(&self, z: f64) -> f64 {
        self.monomials
            .iter()
            .map(|m| m.coeff * z.powi(m.degree as i32))
            .sum()
    }

    /// The antiderivative G(z) = Σ a_j z^{d_j+1} / (d_j + 1), G(0) = 0.
    pub fn antiderivative(&self, z: f64) -> f64 {
        self.monomials
            .iter()
            .map(|m| m.coeff * z.powi(m.degree as i32 + 1) / (m.degree + 1) as f64)
            .sum()
    }
}

impl std::fmt::Display for PolyNonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, m) in self.monomials.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*u^{}", m.coeff, m.degree)?;
        }
        Ok(())
    }
}

/// Exact modes of `P(u)` for `1 ≤ k ≤ cutoff` together with its mean.
pub fn poly_modes(u: &SpectralField, p: &PolyNonlinearity, cutoff: usize) -> (f64, Vec<Complex64>) {
    let band = (p.max_degree() as usize * u.cutoff()).max(cutoff);
    let mut grid = Grid::for_modes(band);
    let mut vals = vec![0.0; grid.len()];
    grid.synthesize(0.0, u.positive_modes(), &mut vals);
    for v in vals.iter_mut() {
        *v = p.eval(*v);
    }
    grid.analyze(&vals, cutoff)
}

/// `∂_x P(u)` truncated to `|k| ≤ cutoff`.
pub fn dx_p(u: &SpectralField, p: &PolyNonlinearity, cutoff: usize) -> Result<SpectralField> {
    if cutoff < u.cutoff() {
        return Err(Error::invalid("dxP cutoff must be at least the field cutoff"));
    }
    if p.is_zero() {
        return Ok(SpectralField::zeros(cutoff));
    }
    let (_, modes) = poly_modes(u, p, cutoff);
    let modes = modes
        .into_iter()
        .enumerate()
        .map(|(i, c)| c * Complex64::new(0.0, (i + 1) as f64))
        .collect();
    SpectralField::from_positive(modes)
}

/// `Σ_j a_j d_j ⨍ u^{d_j - 1}`, the velocity of the gauge phase.
pub fn resonant_velocity(u: &SpectralField, p: &PolyNonlinearity) -> Result<f64> {
    let mut acc = 0.0;
    for m in p.active() {
        let mean = mean_power(u, m.degree - 1)? / (2.0 * std::f64::consts::PI);
        acc += m.coeff * m.degree as f64 * mean;
    }
    Ok(acc)
}

/// `R¹[u]_k = ik u_k Σ_j a_j d_j ⨍ u^{d_j-1}`.
pub fn resonant_r1(u: &SpectralField, p: &PolyNonlinearity) -> Result<SpectralField> {
    let v = resonant_velocity(u, p)?;
    Ok(u.derivative().map_modes(|_, c| c * v))
}

/// Predicate of the resonant set R_k: some slot equals the output frequency.
pub fn is_resonant(t: &[i64]) -> bool {
    let k: i64 = t.iter().sum();
    t.len() >= 2 && t.contains(&k)
}

/// The full resonant sum `Σ_{R_k} ik Π u_{k_j}` weighted by the coefficients
/// of P, by direct enumeration.
pub fn resonant_full(u: &SpectralField, p: &PolyNonlinearity) -> Result<SpectralField> {
    let n = u.cutoff();
    let mut out = SpectralField::zeros(n);
    for m in p.active() {
        let spec = MultilinearSpec::new(
            m.degree as usize,
            |t: &[i64]| Complex64::new(0.0, t.iter().sum::<i64>() as f64),
            is_resonant,
        );
        let term = multilinear_apply_diag(&spec, u, n)?;
        out = &out + &(&term * m.coeff);
    }
    Ok(out)
}

/// `R² = R − R¹`.
pub fn resonant_r2(u: &SpectralField, p: &PolyNonlinearity) -> Result<SpectralField> {
    let full = resonant_full(u, p)?;
    let r1 = resonant_r1(u, p)?;
    Ok(&full - &r1)
}

/// First slot dominant: `|k_1| ≥ C_hl · max_{j≥2} |k_j|` (ties included),
/// `k_2 + … + k_n ≠ 0`, and no trailing slot resonant with the output.
pub fn high_low(t: &[i64], c_hl: f64) -> bool {
    let rest = &t[1..];
    let s: i64 = rest.iter().sum();
    if s == 0 {
        return false;
    }
    let m = rest.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0);
    if (t[0].unsigned_abs() as f64) < c_hl * m as f64 {
        return false;
    }
    let k = t[0] + s;
    !rest.contains(&k)
}

/// `HL^n[v_1, …, v_n]`: symbol ik on the [`high_low`] domain.
pub fn hl_apply(inputs: &[&SpectralField], c_hl: f64, cutoff: usize) -> Result<SpectralField> {
    let spec = MultilinearSpec::new(
        inputs.len(),
        |t: &[i64]| Complex64::new(0.0, t.iter().sum::<i64>() as f64),
        move |t: &[i64]| high_low(t, c_hl),
    );
    multilinear_apply(&spec, inputs, cutoff)
}

/// Non-resonant split: HL^{d_j}[u] for each monomial (unweighted) and HH.
#[derive(Debug, Clone)]
pub struct NonResonantSplit {
    pub hl: Vec<(u32, SpectralField)>,
    pub hh: SpectralField,
}

/// Splits `NR = dxP − R¹ − R²` into `Σ a_j d_j HL^{d_j} + HH`; all parts are
/// truncated to the full band `d_max · N`.
pub fn split_nr(u: &SpectralField, p: &PolyNonlinearity, c_hl: f64) -> Result<NonResonantSplit> {
    let band = p.max_degree() as usize * u.cutoff();
    let full = dx_p(u, p, band)?;
    let r1 = resonant_r1(u, p)?;
    let r2 = resonant_r2(u, p)?;
    let mut hh = &(&full - &r1) - &r2;
    let mut hl = Vec::new();
    for m in p.monomials() {
        let inputs = vec![u; m.degree as usize];
        let term = hl_apply(&inputs, c_hl, band)?;
        hh = &hh - &(&term * (m.coeff * m.degree as f64));
        hl.push((m.degree, term));
    }
    Ok(NonResonantSplit { hl, hh })
}

type Symbol<'a> = Box<dyn Fn(&[i64]) -> Complex64 + Sync + 'a>;
type Domain<'a> = Box<dyn Fn(&[i64]) -> bool + Sync + 'a>;

/// Restricted n-linear Fourier multiplier
/// `T_σ(u_1..u_n)_k = Σ_{k_1+…+k_n=k, Ω_k} σ(k_1..k_n) Π u_j(k_j)`.
///
/// The symbol must satisfy σ(−t) = conj σ(t) so the output is real; only
/// positive output modes are computed.
pub struct MultilinearSpec<'a> {
    pub n: usize,
    symbol: Symbol<'a>,
    domain: Domain<'a>,
}

impl<'a> MultilinearSpec<'a> {
    pub fn new(
        n: usize,
        symbol: impl Fn(&[i64]) -> Complex64 + Sync + 'a,
        domain: impl Fn(&[i64]) -> bool + Sync + 'a,
    ) -> Self {
        MultilinearSpec {
            n,
            symbol: Box::new(symbol),
            domain: Box::new(domain),
        }
    }

    pub fn symbol(&self, t: &[i64]) -> Complex64 {
        (self.symbol)(t)
    }

    pub fn in_domain(&self, t: &[i64]) -> bool {
        (self.domain)(t)
    }
}

fn support(u: &SpectralField) -> Vec<(i64, Complex64)> {
    u.modes().filter(|(_, c)| *c != Complex64::default()).collect()
}

/// Applies `spec` to `inputs`, returning modes `1 ≤ k ≤ cutoff`. Tuples are
/// visited lexicographically; the leading slot is split across threads and
/// partial sums merged in slot order.
pub fn multilinear_apply(
    spec: &MultilinearSpec<'_>,
    inputs: &[&SpectralField],
    cutoff: usize,
) -> Result<SpectralField> {
    multilinear_apply_with_budget(spec, inputs, cutoff, DEFAULT_TUPLE_BUDGET)
}

pub fn multilinear_apply_with_budget(
    spec: &MultilinearSpec<'_>,
    inputs: &[&SpectralField],
    cutoff: usize,
    budget: u128,
) -> Result<SpectralField> {
    if inputs.len() != spec.n || spec.n == 0 {
        return Err(Error::invalid(format!(
            "operator of arity {} given {} inputs",
            spec.n,
            inputs.len()
        )));
    }
    let supports: Vec<Vec<(i64, Complex64)>> = inputs.iter().map(|u| support(u)).collect();
    let work: u128 = supports.iter().map(|s| s.len() as u128).product();
    tuples::check_budget("restricted multilinear sum", work, budget)?;
    if work == 0 {
        return Ok(SpectralField::zeros(cutoff));
    }
    let n = spec.n;
    let partials: Vec<Result<Vec<Complex64>>> = supports[0]
        .par_iter()
        .map(|&(k1, c1)| {
            let mut acc = vec![Complex64::default(); cutoff];
            let mut t = vec![0i64; n];
            t[0] = k1;
            let mut bad = None;
            scatter(spec, &supports, 1, k1, c1, &mut t, &mut acc, &mut bad);
            match bad {
                Some(e) => Err(e),
                None => Ok(acc),
            }
        })
        .collect();
    let mut out = vec![Complex64::default(); cutoff];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p?) {
            *o += v;
        }
    }
    SpectralField::from_positive(out)
}

#[allow(clippy::too_many_arguments)]
fn scatter(
    spec: &MultilinearSpec<'_>,
    supports: &[Vec<(i64, Complex64)>],
    slot: usize,
    sum: i64,
    prod: Complex64,
    t: &mut [i64],
    acc: &mut [Complex64],
    bad: &mut Option<Error>,
) {
    if bad.is_some() {
        return;
    }
    if slot == t.len() {
        if sum <= 0 || sum as usize > acc.len() || !spec.in_domain(t) {
            return;
        }
        let s = spec.symbol(t);
        if !s.re.is_finite() || !s.im.is_finite() {
            *bad = Some(Error::NonFinite("multilinear symbol"));
            return;
        }
        acc[sum as usize - 1] += s * prod;
        return;
    }
    for &(k, c) in &supports[slot] {
        t[slot] = k;
        scatter(spec, supports, slot + 1, sum + k, prod * c, t, acc, bad);
    }
}

/// `T_σ(u, …, u)`.
pub fn multilinear_apply_diag(
    spec: &MultilinearSpec<'_>,
    u: &SpectralField,
    cutoff: usize,
) -> Result<SpectralField> {
    let inputs = vec![u; spec.n];
    multilinear_apply(spec, &inputs, cutoff)
}

/// R_k and the per-slot sets R_k^l over `0 < |k_j| ≤ K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonantSets {
    pub union: Vec<Vec<i64>>,
    pub per_slot: Vec<Vec<Vec<i64>>>,
}

pub fn enumerate_resonant(k: i64, n: usize, k_max: i64) -> Result<ResonantSets> {
    if k == 0 {
        return Err(Error::ZeroSum);
    }
    if n < 2 {
        return Err(Error::invalid("resonant sets need n >= 2"));
    }
    tuples::check_budget(
        "resonant enumeration",
        tuples::box_count(n - 1, k_max),
        DEFAULT_TUPLE_BUDGET,
    )?;
    let mut union = Vec::new();
    let mut per_slot = vec![Vec::new(); n];
    for_each_with_sum(n, k_max, k, |t| {
        let mut any = false;
        for (l, &kl) in t.iter().enumerate() {
            if kl == k {
                per_slot[l].push(t.to_vec());
                any = true;
            }
        }
        if any {
            union.push(t.to_vec());
        }
    });
    Ok(ResonantSets { union, per_slot })
}

/// `| |R_k| − Σ_{∅≠S⊆[n]} (−1)^{|S|+1} |∩_{l∈S} R_k^l| |`, where each
/// intersection is counted independently by fixing the slots in S to k and
/// enumerating the free slots.
pub fn inclusion_exclusion_residual(k: i64, n: usize, k_max: i64) -> Result<u64> {
    let direct = enumerate_resonant(k, n, k_max)?.union.len() as i64;
    let mut alternating: i64 = 0;
    for mask in 1u32..(1 << n) {
        let fixed = mask.count_ones() as usize;
        let count = if k.abs() > k_max {
            0
        } else {
            let free = n - fixed;
            let target = (1 - fixed as i64) * k;
            let mut c = 0i64;
            for_each_with_sum(free, k_max, target, |_| c += 1);
            c
        };
        if fixed % 2 == 1 {
            alternating += count;
        } else {
            alternating -= count;
        }
    }
    Ok((direct - alternating).unsigned_abs())
}

/// Checks σ and Ω for invariance under transpositions on a small box.
pub fn check_symmetric(spec: &MultilinearSpec<'_>, k_max: i64) -> Result<()> {
    let n = spec.n;
    let mut bad = None;
    for_each_in_box(n, k_max, |t| {
        if bad.is_some() || t.iter().sum::<i64>() == 0 {
            return;
        }
        let base_in = spec.in_domain(t);
        let base = spec.symbol(t);
        for i in 0..n {
            for j in i + 1..n {
                let mut s = t.to_vec();
                s.swap(i, j);
                let same_domain = spec.in_domain(&s) == base_in;
                let same_symbol =
                    !base_in || (spec.symbol(&s) - base).norm() <= 1e-12 * (1.0 + base.norm());
                if !same_domain || !same_symbol {
                    bad = Some(t.to_vec());
                    return;
                }
            }
        }
    });
    match bad {
        Some(t) => Err(Error::AsymmetricSymbol(t)),
        None => Ok(()),
    }
}

/// Box used by [`polarize_check`] to screen for asymmetric operators
/// (shrunk to 2 for n ≥ 5).
pub const SYMMETRY_PROBE_BOX: i64 = 4;

/// Relative residual of the polarization identity
/// `Σ_{A⊆[n]} (−1)^{|A|} T(Σ_{j∉A} v_j) = n! T(v_1, …, v_n)`,
/// normalized by the largest term.
pub fn polarize_check(spec: &MultilinearSpec<'_>, vs: &[SpectralField], cutoff: usize) -> Result<f64> {
    let n = spec.n;
    if vs.len() != n {
        return Err(Error::invalid("polarization needs one field per slot"));
    }
    let probe = if n >= 5 { 2 } else { SYMMETRY_PROBE_BOX };
    check_symmetric(spec, probe)?;
    let width = vs.iter().map(|v| v.cutoff()).max().unwrap_or(0);
    let mut lhs = SpectralField::zeros(cutoff);
    let mut scale: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        let mut sum = SpectralField::zeros(width);
        for (j, v) in vs.iter().enumerate() {
            if mask & (1 << j) == 0 {
                sum = &sum + v;
            }
        }
        let term = multilinear_apply_diag(spec, &sum, cutoff)?;
        scale = scale.max(term.sobolev_norm(0.0));
        if mask.count_ones() % 2 == 0 {
            lhs = &lhs + &term;
        } else {
            lhs = &lhs - &term;
        }
    }
    let refs: Vec<&SpectralField> = vs.iter().collect();
    let factorial: f64 = (1..=n).map(|j| j as f64).product();
    let rhs = &multilinear_apply(spec, &refs, cutoff)? * factorial;
    scale = scale.max(rhs.sobolev_norm(0.0));
    let diff = (&lhs - &rhs).sobolev_norm(0.0);
    Ok(if scale > 0.0 { diff / scale } else { diff })
}
