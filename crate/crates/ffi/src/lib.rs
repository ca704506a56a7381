//! C ABI over `gkdv-core`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`GkdvStatus`]; on failure the message is kept per thread and can be
//! copied out with [`gkdv_last_error`]. Output pointers are written only on
//! success.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gkdv_core::dispersion::{h_n, verify_cases, ComparabilityConstants};
use gkdv_core::solver::{simulate, Equation, SolverConfig};
use gkdv_core::{Error, PolyNonlinearity, SpectralField, Trajectory};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkdvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BlowUp = 3,
    BudgetExceeded = 4,
    Overflow = 5,
    NonFinite = 6,
    Panic = 7,
    Other = 8,
}

/// Mean-zero real field stored by its modes c_1..c_N.
pub struct GkdvField(SpectralField);

/// Polynomial nonlinearity P(u) = Σ a_j u^{d_j}.
pub struct GkdvPoly(PolyNonlinearity);

/// Sampled solution of a run.
pub struct GkdvTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> GkdvStatus {
    match e {
        Error::BlowUp { .. } => GkdvStatus::BlowUp,
        Error::BudgetExceeded { .. } => GkdvStatus::BudgetExceeded,
        Error::Overflow(_) => GkdvStatus::Overflow,
        Error::NonFinite(_) => GkdvStatus::NonFinite,
        Error::InvalidArgument(_)
        | Error::ZeroMode
        | Error::DuplicateMode(_)
        | Error::ConjugateMismatch(_)
        | Error::ZeroSum
        | Error::NonMonotoneTimes
        | Error::AsymmetricSymbol(_)
        | Error::VanishingDenominator(_) => GkdvStatus::InvalidArgument,
        _ => GkdvStatus::Other,
    }
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), (GkdvStatus, String)>) -> GkdvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GkdvStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside gkdv".into());
            GkdvStatus::Panic
        }
    }
}

fn core<T>(r: gkdv_core::Result<T>) -> Result<T, (GkdvStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (GkdvStatus, String) {
    (GkdvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (GkdvStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (GkdvStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the buffer size needed for
/// the full message. `buf` may be null to query the size.
///
/// # Safety
/// `buf` must be null or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gkdv_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Builds a field from `n` positive modes `c_k = re[k-1] + i im[k-1]`.
///
/// # Safety
/// `re` and `im` must each point to `n` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_from_modes(
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut GkdvField,
) -> GkdvStatus {
    guard(|| {
        if n > 0 && (re.is_null() || im.is_null()) {
            return Err(null("mode array"));
        }
        let modes: Vec<Complex64> = (0..n).map(|i| Complex64::new(*re.add(i), *im.add(i))).collect();
        let f = core(SpectralField::from_positive(modes))?;
        put(out, boxed(GkdvField(f)), "out")
    })
}

/// `c_k = ⟨k⟩^{-s-1/2-δ} e^{iθ_k}` with phases from a seeded stream.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_random_sobolev(
    s: f64,
    cutoff: usize,
    seed: u64,
    delta: f64,
    out: *mut *mut GkdvField,
) -> GkdvStatus {
    guard(|| {
        let f = core(SpectralField::random_sobolev(s, cutoff, seed, delta))?;
        put(out, boxed(GkdvField(f)), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_free(f: *mut GkdvField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Mode cutoff N, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_cutoff(f: *const GkdvField) -> usize {
    f.as_ref().map_or(0, |f| f.0.cutoff())
}

/// The k-th coefficient for any integer k; zero outside the band.
///
/// # Safety
/// `f` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_coeff(f: *const GkdvField, k: i64, re: *mut f64, im: *mut f64) -> GkdvStatus {
    guard(|| {
        let c = deref(f, "field")?.0.coeff(k);
        put(re, c.re, "re")?;
        put(im, c.im, "im")
    })
}

/// `(Σ_{k≠0} ⟨k⟩^{2s} |c_k|²)^{1/2}`.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_sobolev_norm(f: *const GkdvField, s: f64, out: *mut f64) -> GkdvStatus {
    guard(|| {
        let f = deref(f, "field")?;
        if !s.is_finite() {
            return Err((GkdvStatus::InvalidArgument, "s must be finite".into()));
        }
        put(out, f.0.sobolev_norm(s), "out")
    })
}

/// Airy evolution `c_k ↦ c_k e^{ik³t}` into a new handle.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_free_flow(f: *const GkdvField, t: f64, out: *mut *mut GkdvField) -> GkdvStatus {
    guard(|| {
        let g = deref(f, "field")?.0.free_flow(t);
        put(out, boxed(GkdvField(g)), "out")
    })
}

/// Translation `u(x) ↦ u(x + h)` into a new handle.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_field_translate(f: *const GkdvField, h: f64, out: *mut *mut GkdvField) -> GkdvStatus {
    guard(|| {
        let g = deref(f, "field")?.0.translate(h);
        put(out, boxed(GkdvField(g)), "out")
    })
}

/// `P(u) = Σ coeffs[j] u^{degrees[j]}`; degrees at least 2 and strictly
/// increasing. `n = 0` gives P ≡ 0.
///
/// # Safety
/// `coeffs` and `degrees` must each point to `n` readable values; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_poly_new(
    coeffs: *const f64,
    degrees: *const u32,
    n: usize,
    out: *mut *mut GkdvPoly,
) -> GkdvStatus {
    guard(|| {
        let p = if n == 0 {
            PolyNonlinearity::zero()
        } else {
            if coeffs.is_null() || degrees.is_null() {
                return Err(null("polynomial arrays"));
            }
            let terms: Vec<(f64, u32)> = (0..n).map(|i| (*coeffs.add(i), *degrees.add(i))).collect();
            core(PolyNonlinearity::new(&terms))?
        };
        put(out, boxed(GkdvPoly(p)), "out")
    })
}

/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_poly_free(p: *mut GkdvPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Integrates `u_t + u_xxx = ∂_x P(u)` (or its gauged form when `gauged`)
/// with Lawson RK4, sampling every `sample_every` steps and at the end.
/// A tripped blow-up guard returns `GKDV_STATUS_BLOW_UP`.
///
/// # Safety
/// `f` and `p` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_simulate(
    f: *const GkdvField,
    p: *const GkdvPoly,
    cutoff: usize,
    dt: f64,
    horizon: f64,
    sample_every: usize,
    gauged: bool,
    out: *mut *mut GkdvTrajectory,
) -> GkdvStatus {
    guard(|| {
        let f = deref(f, "field")?;
        let p = deref(p, "polynomial")?;
        let cfg = SolverConfig {
            cutoff,
            dt,
            horizon,
            sample_every,
            equation: if gauged { Equation::Gauged } else { Equation::Original },
            p: p.0.clone(),
        };
        let traj = core(simulate(&f.0, &cfg))?;
        put(out, boxed(GkdvTrajectory(traj)), "out")
    })
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_free(t: *mut GkdvTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_len(t: *const GkdvTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

fn index(t: &GkdvTrajectory, i: usize) -> Result<usize, (GkdvStatus, String)> {
    if i < t.0.len() {
        Ok(i)
    } else {
        Err((GkdvStatus::InvalidArgument, format!("sample {i} out of range")))
    }
}

/// Time and gauge phase of sample `i`.
///
/// # Safety
/// `t` must be a live handle; `time` and `phase` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_sample(
    t: *const GkdvTrajectory,
    i: usize,
    time: *mut f64,
    phase: *mut f64,
) -> GkdvStatus {
    guard(|| {
        let t = deref(t, "trajectory")?;
        let i = index(t, i)?;
        put(time, t.0.times()[i], "time")?;
        put(phase, t.0.phase()[i], "phase")
    })
}

/// Copy of the state at sample `i` as a new field handle.
///
/// # Safety
/// `t` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_trajectory_state(
    t: *const GkdvTrajectory,
    i: usize,
    out: *mut *mut GkdvField,
) -> GkdvStatus {
    guard(|| {
        let t = deref(t, "trajectory")?;
        let i = index(t, i)?;
        put(out, boxed(GkdvField(t.0.states()[i].clone())), "out")
    })
}

/// `(Σ k_j)³ − Σ k_j³`; overflow of a 64-bit result is reported.
///
/// # Safety
/// `k` must point to `n` readable values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_h_n(k: *const i64, n: usize, out: *mut i64) -> GkdvStatus {
    guard(|| {
        if k.is_null() {
            return Err(null("frequency array"));
        }
        let t = std::slice::from_raw_parts(k, n);
        let h = core(h_n(t))?;
        let h = i64::try_from(h).map_err(|_| (GkdvStatus::Overflow, format!("H_n = {h} exceeds 64 bits")))?;
        put(out, h, "out")
    })
}

/// Exhaustive case check over `0 < |k_j| ≤ k_max`. A nonpositive `c_c`
/// selects the default 1/(2n).
///
/// # Safety
/// `tuples` and `violations` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gkdv_verify_cases(
    n: usize,
    k_max: i64,
    c_a: f64,
    c_c: f64,
    c_d: f64,
    c_hl: f64,
    tuples: *mut u64,
    violations: *mut u64,
) -> GkdvStatus {
    guard(|| {
        let c = ComparabilityConstants {
            c_a,
            c_c: (c_c > 0.0).then_some(c_c),
            c_d,
            c_hl,
        };
        let r = core(verify_cases(n, k_max, &c))?;
        put(tuples, r.tuples, "tuples")?;
        put(violations, r.violations, "violations")
    })
}
