//! Normal-form operators, the corrected variable w, and the μ-symbol
//! cancellations.
//!
//! `T^n_NF(f, v_2, …, v_n)_k = Σ (k / H_n) f_{k_1} Π v_{k_j}` over the
//! [`high_low`] domain. With `L = ∂_t + ∂_x³` and `F = e^{t∂³} f` (modes
//! `f_k e^{ik³t}`) one has
//!
//! `L T^n_NF(F, v, …, v) = −HL^n[F, v, …, v] + (n−1) T^n_NF(F, v, …, v, Lv)`,
//!
//! so the substitution `w = ũ − F + Σ_j a_j d_j T^{d_j}_NF(F, ũ, …, ũ)` removes
//! the high-low interactions of the free solution from the equation for ũ.

use std::sync::Mutex;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::dispersion::h_n;
use crate::error::{Error, Result};
use crate::fourier::{Band, SpectralField};
use crate::nonlinearity::{
    dx_p, high_low, hl_apply, multilinear_apply, resonant_r1, resonant_r2, split_nr, MultilinearSpec,
    PolyNonlinearity,
};
use crate::tuples::{self, for_each_in_box, for_each_with_sum, kmax, sorted_magnitudes};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFormConfig {
    /// Dominance threshold shared with the HL split, at least 2.
    pub c_hl: f64,
    /// Output band of normal-form fields.
    pub cutoff: usize,
}

impl NormalFormConfig {
    /// Band wide enough that every term of the w-equation is exact for fields
    /// with cutoff `n` and nonlinearity `p`.
    pub fn for_field(n: usize, p: &PolyNonlinearity, c_hl: f64) -> Self {
        let d = p.max_degree() as usize;
        NormalFormConfig {
            c_hl,
            cutoff: d * d * n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_hl >= 2.0) || !self.c_hl.is_finite() {
            return Err(Error::invalid("C_hl must be at least 2"));
        }
        if self.cutoff == 0 {
            return Err(Error::invalid("normal-form cutoff must be positive"));
        }
        Ok(())
    }
}

/// Confirms `H_n ≠ 0` on every high-low tuple of the box `|k_j| ≤ k_max`.
pub fn check_nonvanishing(n: usize, k_max: i64, c_hl: f64) -> Result<()> {
    tuples::check_budget("H_n guard", tuples::box_count(n, k_max), tuples::DEFAULT_TUPLE_BUDGET)?;
    let mut bad = None;
    let mut overflow = None;
    for_each_in_box(n, k_max, |t| {
        if bad.is_some() || overflow.is_some() || !high_low(t, c_hl) {
            return;
        }
        match h_n(t) {
            Ok(0) => bad = Some(t.to_vec()),
            Ok(_) => {}
            Err(e) => overflow = Some(e),
        }
    });
    if let Some(e) = overflow {
        return Err(e);
    }
    match bad {
        Some(t) => Err(Error::VanishingDenominator(t)),
        None => Ok(()),
    }
}

/// `k / H_n` at a tuple, or `None` where H_n vanishes.
pub fn nf_symbol(t: &[i64]) -> Option<f64> {
    let h = h_n(t).ok()?;
    if h == 0 {
        return None;
    }
    let k: i64 = t.iter().sum();
    Some(k as f64 / h as f64)
}

fn nf_spec<'a>(n: usize, c_hl: f64, offender: &'a Mutex<Option<Vec<i64>>>) -> MultilinearSpec<'a> {
    MultilinearSpec::new(
        n,
        move |t: &[i64]| match nf_symbol(t) {
            Some(s) => Complex64::new(s, 0.0),
            None => {
                let mut slot = offender.lock().unwrap();
                if slot.is_none() {
                    *slot = Some(t.to_vec());
                }
                Complex64::default()
            }
        },
        move |t: &[i64]| high_low(t, c_hl),
    )
}

/// `T^n_NF(f, v_2, …, v_n)` with n = `vs.len() + 1`.
pub fn t_nf(f: &SpectralField, vs: &[&SpectralField], cfg: &NormalFormConfig) -> Result<SpectralField> {
    cfg.validate()?;
    if vs.is_empty() {
        return Err(Error::invalid("T_NF needs n >= 2"));
    }
    let offender = Mutex::new(None);
    let spec = nf_spec(vs.len() + 1, cfg.c_hl, &offender);
    let mut inputs = vec![f];
    inputs.extend_from_slice(vs);
    let out = multilinear_apply(&spec, &inputs, cfg.cutoff)?;
    drop(spec);
    match offender.into_inner().unwrap() {
        Some(t) => Err(Error::VanishingDenominator(t)),
        None => Ok(out),
    }
}

/// `T^n_NF(f, v, …, v)`.
pub fn t_nf_diag(n: usize, f: &SpectralField, v: &SpectralField, cfg: &NormalFormConfig) -> Result<SpectralField> {
    let vs = vec![v; n - 1];
    t_nf(f, &vs, cfg)
}

/// Permutation-symmetric version of T_NF: some slot dominates in the
/// [`high_low`] sense, symbol `k / H_n`.
pub fn nf_symmetric_spec(n: usize, c_hl: f64) -> MultilinearSpec<'static> {
    let dominated = move |t: &[i64]| {
        (0..t.len()).any(|j| {
            let mut s = t.to_vec();
            s.swap(0, j);
            high_low(&s, c_hl)
        })
    };
    MultilinearSpec::new(
        n,
        |t: &[i64]| Complex64::new(nf_symbol(t).unwrap_or(f64::NAN), 0.0),
        dominated,
    )
}

/// `max_trials ‖T^n_NF(u, v, …, v)‖_{H^{s+1}} / (‖u‖_{H^s} ‖v‖_{H^{0.6}}^{n−1})`
/// over random fields `u ~ H^s`, `v ~ H^{0.6}` at cutoff `n_modes`; trial i
/// uses seeds `seed + 2i` and `seed + 2i + 1`. Zero inputs are skipped.
pub fn nf_bound_ratio(
    n: usize,
    s: f64,
    trials: usize,
    seed: u64,
    n_modes: usize,
    c_hl: f64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("nf_bound_ratio needs at least one trial"));
    }
    let cfg = NormalFormConfig {
        c_hl,
        cutoff: n * n_modes,
    };
    let mut best: f64 = 0.0;
    for i in 0..trials as u64 {
        let u = SpectralField::random_sobolev(s, n_modes, seed + 2 * i, 0.05)?;
        let v = SpectralField::random_sobolev(0.6, n_modes, seed + 2 * i + 1, 0.05)?;
        let den = u.sobolev_norm(s) * v.sobolev_norm(0.6).powi(n as i32 - 1);
        if den == 0.0 {
            continue;
        }
        let t = t_nf_diag(n, &u, &v, &cfg)?;
        best = best.max(t.sobolev_norm(s + 1.0) / den);
    }
    Ok(best)
}

/// `w = ũ − F + Σ_j a_j d_j T^{d_j}_NF(F, ũ, …, ũ)` with `F = e^{t∂³} f`.
pub fn w_decompose(
    u_tilde: &SpectralField,
    f: &SpectralField,
    t: f64,
    p: &PolyNonlinearity,
    cfg: &NormalFormConfig,
) -> Result<SpectralField> {
    let free = f.free_flow(t);
    let mut w = (u_tilde - &free).with_cutoff(cfg.cutoff);
    for m in p.active() {
        let term = t_nf_diag(m.degree as usize, &free, u_tilde, cfg)?;
        w = &w + &(&term * (m.coeff * m.degree as f64));
    }
    Ok(w)
}

/// `w(0) = Σ_j a_j d_j T^{d_j}_NF(f, …, f)`.
pub fn w_initial(f: &SpectralField, p: &PolyNonlinearity, cfg: &NormalFormConfig) -> Result<SpectralField> {
    let mut w = SpectralField::zeros(cfg.cutoff);
    for m in p.active() {
        let term = t_nf_diag(m.degree as usize, f, f, cfg)?;
        w = &w + &(&term * (m.coeff * m.degree as f64));
    }
    Ok(w)
}

/// Right-hand side of the w-equation, term by term.
#[derive(Debug, Clone)]
pub struct WTerms {
    /// `P_N (R² + HH)[ũ]`
    pub w1: SpectralField,
    /// `Σ_j a_j d_j HL^{d_j}[w, ũ, …, ũ]`
    pub w2: SpectralField,
    /// `a_1 d_1 (d_1 − 1) T^{d_1}_NF(F, ũ, …, ũ, Lũ)` for the first monomial
    pub w3: SpectralField,
    /// the same remainder summed over the remaining monomials
    pub w4: SpectralField,
    /// `−Σ_j (a_j d_j)² HL^{d_j}[T^{d_j}_NF, ũ, …, ũ]`
    pub w5: SpectralField,
    /// `−Σ_{i≠j} a_i d_i a_j d_j HL^{d_i}[T^{d_j}_NF, ũ, …, ũ]`
    pub w6: SpectralField,
    /// `−Σ_j a_j d_j (I − P_N) HL^{d_j}[ũ]`, present because ũ is a Galerkin
    /// solution
    pub galerkin: SpectralField,
}

impl WTerms {
    pub fn labeled(&self) -> [(&'static str, &SpectralField); 7] {
        [
            ("w1", &self.w1),
            ("w2", &self.w2),
            ("w3", &self.w3),
            ("w4", &self.w4),
            ("w5", &self.w5),
            ("w6", &self.w6),
            ("galerkin", &self.galerkin),
        ]
    }

    pub fn sum(&self) -> SpectralField {
        self.labeled()
            .iter()
            .fold(SpectralField::zeros(0), |acc, (_, f)| &acc + f)
    }
}

/// Evaluates every term of `Lw` at one time, for ũ a solution of the
/// Galerkin-truncated gauged equation with cutoff `ũ.cutoff()`.
pub fn w_rhs_terms(
    u_tilde: &SpectralField,
    f: &SpectralField,
    t: f64,
    p: &PolyNonlinearity,
    cfg: &NormalFormConfig,
) -> Result<WTerms> {
    cfg.validate()?;
    let n = u_tilde.cutoff();
    let m_out = cfg.cutoff;
    let zero = || SpectralField::zeros(m_out);
    let free = f.free_flow(t);
    let w = w_decompose(u_tilde, f, t, p, cfg)?;

    let split = split_nr(u_tilde, p, cfg.c_hl)?;
    let r1 = resonant_r1(u_tilde, p)?;
    let r2 = resonant_r2(u_tilde, p)?;
    let full = dx_p(u_tilde, p, n)?;
    let w1 = (&r2 + &split.hh).project(Band::AtMost(n)).with_cutoff(m_out);

    let l_u = &full - &r1;

    let mut w2 = zero();
    let mut w3 = zero();
    let mut w4 = zero();
    let mut galerkin = zero();
    let mut nf_terms = Vec::new();
    for (idx, m) in p.active().enumerate() {
        let d = m.degree as usize;
        let ad = m.coeff * d as f64;
        let mut inputs = vec![&w];
        inputs.extend(std::iter::repeat_n(u_tilde, d - 1));
        w2 = &w2 + &(&hl_apply(&inputs, cfg.c_hl, m_out)? * ad);

        let mut slots = vec![u_tilde; d - 2];
        slots.push(&l_u);
        let rem = &t_nf(&free, &slots, cfg)? * (ad * (d as f64 - 1.0));
        if idx == 0 {
            w3 = &w3 + &rem;
        } else {
            w4 = &w4 + &rem;
        }

        let hl_u = split
            .hl
            .iter()
            .find(|(deg, _)| *deg == m.degree)
            .map(|(_, f)| f.clone())
            .unwrap_or_else(zero);
        galerkin = &galerkin - &(&hl_u.project(Band::Above(n)) * ad);

        nf_terms.push((m.degree, ad, t_nf_diag(d, &free, u_tilde, cfg)?));
    }

    let mut w5 = zero();
    let mut w6 = zero();
    for &(d_outer, ad_outer, _) in &nf_terms {
        for (d_inner, ad_inner, nf) in &nf_terms {
            let mut inputs = vec![nf];
            inputs.extend(std::iter::repeat_n(u_tilde, d_outer as usize - 1));
            let term = &hl_apply(&inputs, cfg.c_hl, m_out)? * (-ad_outer * ad_inner);
            if d_outer == *d_inner {
                w5 = &w5 + &term;
            } else {
                w6 = &w6 + &term;
            }
        }
    }

    let fit = |f: SpectralField| f.with_cutoff(m_out);
    Ok(WTerms {
        w1,
        w2: fit(w2),
        w3: fit(w3),
        w4: fit(w4),
        w5: fit(w5),
        w6: fit(w6),
        galerkin: fit(galerkin),
    })
}

/// `(∂_t + ∂_x³) w` at the middle sample from three equally spaced samples
/// `w(t − Δ), w(t), w(t + Δ)`, by central differencing the interaction
/// variable `e^{−ik³t} w_k`.
pub fn airy_time_derivative(prev: &SpectralField, next: &SpectralField, t: f64, delta: f64) -> SpectralField {
    let m = prev.cutoff().max(next.cutoff());
    let a = prev.with_cutoff(m).free_flow(-(t - delta));
    let b = next.with_cutoff(m).free_flow(-(t + delta));
    (&(&b - &a) * (0.5 / delta)).free_flow(t)
}

type Q = Ratio<i128>;

/// Imaginary parts of `σ = i k k̃_1 / H_n` and `μ = i / (3 k̃_2)` on a head
/// tuple, with their difference by several routes.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMinusMu {
    /// `Im(σ − μ)` as the direct difference.
    pub direct: Q,
    /// `−Σ_{j=2}^{n−1} k_j k̃_j k̃_{j+1} / (k̃_2 H_n)` from the telescoped H_n.
    pub telescoped: Q,
    /// Expanded form separating the part divisible by k̃_2.
    pub expanded: Q,
    /// `−k_2 k_3 / (3(k_1+k_2)(k_2+k_3)(k_3+k_1))` for n = 3.
    pub cubic: Option<Q>,
    /// Direct difference in floating point.
    pub float: f64,
    /// `|σ| + |μ|`, the scale of the floating-point cancellation.
    pub scale: f64,
}

impl SigmaMinusMu {
    pub fn consistent(&self) -> bool {
        let exact = *self.direct.numer() as f64 / *self.direct.denom() as f64;
        let float_ok = (exact - self.float).abs() <= 1e-12 * self.scale;
        self.direct == self.telescoped
            && self.direct == self.expanded
            && self.cubic.is_none_or(|c| c == self.direct)
            && float_ok
    }

    pub fn magnitude(&self) -> f64 {
        (*self.direct.numer() as f64 / *self.direct.denom() as f64).abs()
    }
}

fn checked(x: Option<i128>) -> Result<i128> {
    x.ok_or(Error::Overflow("sigma - mu"))
}

/// σ − μ on a head `(k_1, …, k_n)` (the output frequency is k = k_1 on the
/// resonant set, so σ's prefactor is k_1).
pub fn sigma_minus_mu(head: &[i64]) -> Result<SigmaMinusMu> {
    let n = head.len();
    if n < 2 {
        return Err(Error::invalid("sigma - mu needs n >= 2"));
    }
    if head.contains(&0) {
        return Err(Error::ZeroMode);
    }
    let k: Vec<i128> = head.iter().map(|&x| x as i128).collect();
    let mut tails = vec![0i128; n + 1];
    for j in (0..n).rev() {
        tails[j] = tails[j + 1] + k[j];
    }
    let h = h_n(head)?;
    if h == 0 || tails[1] == 0 {
        return Err(Error::VanishingDenominator(head.to_vec()));
    }
    let sigma = Q::new(checked(k[0].checked_mul(tails[0]))?, h);
    let mu = Q::new(1, checked(tails[1].checked_mul(3))?);
    let direct = sigma - mu;

    // Σ_{j=2}^{n−1} k_j k̃_j k̃_{j+1} (1-based), zero when n = 2
    let mut num = 0i128;
    for j in 1..n - 1 {
        num = checked(num.checked_add(checked(
            k[j].checked_mul(tails[j]).and_then(|x| x.checked_mul(tails[j + 1])),
        )?))?;
    }
    let telescoped = -Q::new(num, checked(tails[1].checked_mul(h))?);

    // k_{j−1} k̃_{j−1} k̃_j = k̃_2 k_{j−1} k̃_j − Σ_{l<j−1<m} k_l k_{j−1} k_m
    // with l ranging over 2..j−2 and m over j..n (1-based)
    let mut divisible = 0i128;
    let mut cross = 0i128;
    for j in 1..n - 1 {
        divisible = checked(divisible.checked_add(checked(k[j].checked_mul(tails[j + 1]))?))?;
        for l in 1..j {
            for m in j + 1..n {
                cross = checked(cross.checked_add(checked(
                    k[l].checked_mul(k[j]).and_then(|x| x.checked_mul(k[m])),
                )?))?;
            }
        }
    }
    let expanded = -Q::new(divisible, h) + Q::new(cross, checked(tails[1].checked_mul(h))?);

    let cubic = if n == 3 {
        let den = 3 * (k[0] + k[1]) * (k[1] + k[2]) * (k[2] + k[0]);
        Some(Q::new(-k[1] * k[2], den))
    } else {
        None
    };
    let sigma_f = k[0] as f64 * tails[0] as f64 / h as f64;
    let mu_f = 1.0 / (3.0 * tails[1] as f64);
    Ok(SigmaMinusMu {
        direct,
        telescoped,
        expanded,
        cubic,
        float: sigma_f - mu_f,
        scale: sigma_f.abs() + mu_f.abs(),
    })
}

/// Outcome of an exhaustive σ − μ sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMuSweep {
    pub n: usize,
    pub admissible: u64,
    /// Tuples where the routes disagree.
    pub mismatches: Vec<Vec<i64>>,
    /// `max |σ − μ| k_1² / (k_max_2 k_max_3 k_max_4)`.
    pub bound_constant: f64,
    pub argmax: Option<Vec<i64>>,
}

/// Sweeps `1 ≤ k_1 ≤ k1_max`, `0 < |k_j| ≤ rest_max` with
/// `|k_1| ≥ C_hl · max_{j≥2} |k_j|` and `k̃_2 ≠ 0`.
pub fn sweep_sigma_minus_mu(n: usize, k1_max: i64, rest_max: i64, c_hl: f64) -> Result<SigmaMuSweep> {
    if n < 2 {
        return Err(Error::invalid("sigma - mu sweep needs n >= 2"));
    }
    tuples::check_budget(
        "sigma - mu sweep",
        k1_max.max(0) as u128 * tuples::box_count(n - 1, rest_max),
        tuples::DEFAULT_TUPLE_BUDGET,
    )?;
    type Partial = (u64, Vec<Vec<i64>>, f64, Option<Vec<i64>>);
    let partials: Vec<Result<Partial>> = (1..=k1_max)
        .into_par_iter()
        .map(|k1| {
            let mut acc: Partial = (0, Vec::new(), 0.0, None);
            let mut err = None;
            let mut head = vec![k1; n];
            for_each_in_box(n - 1, rest_max, |rest| {
                if err.is_some() {
                    return;
                }
                let m = rest.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0);
                if (k1 as f64) < c_hl * m as f64 || rest.iter().sum::<i64>() == 0 {
                    return;
                }
                head[1..].copy_from_slice(rest);
                let r = match sigma_minus_mu(&head) {
                    Ok(r) => r,
                    Err(Error::VanishingDenominator(_)) => return,
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                };
                acc.0 += 1;
                if !r.consistent() && acc.1.len() < 32 {
                    acc.1.push(head.clone());
                }
                let sorted = sorted_magnitudes(&head);
                let weight = (kmax(&sorted, 2) * kmax(&sorted, 3) * kmax(&sorted, 4)) as f64;
                let c = r.magnitude() * (k1 as f64).powi(2) / weight;
                if c > acc.2 {
                    acc.2 = c;
                    acc.3 = Some(head.clone());
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(acc),
            }
        })
        .collect();
    let mut out = SigmaMuSweep {
        n,
        admissible: 0,
        mismatches: Vec::new(),
        bound_constant: 0.0,
        argmax: None,
    };
    for p in partials {
        let (count, bad, c, arg) = p?;
        out.admissible += count;
        out.mismatches.extend(bad);
        if c > out.bound_constant {
            out.bound_constant = c;
            out.argmax = arg;
        }
    }
    Ok(out)
}

/// Which μ-sum [`cancellation_residual`] assembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancellationKind {
    /// `μ = i / (3(k_2 + … + k_n))` over 2n − 2 trailing slots.
    SelfN(usize),
    /// `μ = i / (3(k_2 + … + k_n)) + i / (3(k_2 + … + k_m))` over n + m − 2
    /// trailing slots, each part on its own nonvanishing partial sum.
    Mixed(usize, usize),
}

/// `‖T^B_μ‖_{H⁰}` relative to the same sum with every term replaced by its
/// modulus. The k-th mode is `f_k Σ μ Π u_{k_j}` over trailing slots with
/// `Σ k_j = 0` and `|k| ≥ C_hl · max |k_j|`.
pub fn cancellation_residual(
    kind: CancellationKind,
    f: &SpectralField,
    u: &SpectralField,
    c_hl: f64,
) -> Result<f64> {
    let (slots, splits): (usize, Vec<usize>) = match kind {
        CancellationKind::SelfN(n) if n >= 2 => (2 * n - 2, vec![n - 1]),
        CancellationKind::Mixed(n, m) if n >= 2 && m >= 2 => (n + m - 2, vec![n - 1, m - 1]),
        _ => return Err(Error::invalid("cancellation needs arities >= 2")),
    };
    if !(c_hl >= 2.0) {
        return Err(Error::invalid("C_hl must be at least 2"));
    }
    let ks: Vec<i64> = (1..=f.cutoff() as i64).collect();
    let rows: Vec<Result<(f64, f64)>> = ks
        .par_iter()
        .map(|&k| {
            let fk = f.coeff(k);
            if fk == Complex64::default() {
                return Ok((0.0, 0.0));
            }
            let bound = ((k as f64) / c_hl).floor() as i64;
            let bound = bound.min(u.cutoff() as i64);
            if bound < 1 {
                return Ok((0.0, 0.0));
            }
            tuples::check_budget(
                "cancellation sum",
                tuples::box_count(slots - 1, bound),
                tuples::DEFAULT_TUPLE_BUDGET,
            )?;
            let mut sum = Complex64::default();
            let mut abs = 0.0;
            for_each_with_sum(slots, bound, 0, |t| {
                let prod: Complex64 = t.iter().map(|&kj| u.coeff(kj)).product();
                if prod == Complex64::default() {
                    return;
                }
                for &len in &splits {
                    let partial: i64 = t[..len].iter().sum();
                    if partial == 0 {
                        continue;
                    }
                    let mu = Complex64::new(0.0, 1.0 / (3.0 * partial as f64));
                    sum += mu * prod;
                    abs += mu.norm() * prod.norm();
                }
            });
            Ok(((fk * sum).norm_sqr(), (fk.norm() * abs).powi(2)))
        })
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for r in rows {
        let (a, b) = r?;
        num += a;
        den += b;
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { 0.0 })
}
