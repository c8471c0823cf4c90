//! C ABI over `anosov-entropy`.
//!
//! Every entry point returns an `AeStatus`. On failure a message is kept
//! per thread and can be read with `ae_last_error`. Objects cross the
//! boundary as opaque handles owned by the caller and released with the
//! matching `*_free`. Matrices are dense row-major `double` arrays.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anosov_entropy::analysis::{self, CompareOptions, EntropySeries, Regime, SeriesOptions};
use anosov_entropy::dynamics::{self, CustomPeriodic, QuadraticModel};
use anosov_entropy::gaussian::{self, GaussianState};
use anosov_entropy::qbme;
use anosov_entropy::Error;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidState = 3,
    DimensionMismatch = 4,
    ModeOutOfRange = 5,
    DynamicsOverflow = 6,
    NotPeriodic = 7,
    NotTimeIndependent = 8,
    Eigen = 9,
    NotAsymptotic = 10,
    HorizonCap = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeRegime {
    Unstable = 0,
    Stable = 1,
}

/// Opaque Gaussian state.
pub struct AeState(GaussianState);

/// Opaque quadratic model.
pub struct AeModel(QuadraticModel);

/// Opaque sampled entropy series.
pub struct AeSeries(EntropySeries);

/// Damped-oscillator bath parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AeQbmeParams {
    pub omega: f64,
    pub k: f64,
    pub n_bar: f64,
    pub nu0: f64,
    pub r0: f64,
    pub phi0: f64,
}

/// Options for `ae_compare_rate`. Fill with `ae_compare_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AeCompareOptions {
    pub t_max: f64,
    pub step: f64,
    pub reduced_mode: usize,
    pub tail_fraction: f64,
    pub horizon_cap: f64,
    pub max_norm: f64,
}

/// Result of `ae_compare_rate`. Optional quantities are NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AeRateReport {
    pub regime: AeRegime,
    pub lyapunov: f64,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub half_log_c20: f64,
    pub relative_error: f64,
    pub t_max_used: f64,
    pub max_defect: f64,
    pub window_start: usize,
    pub window_end: usize,
    pub n_samples: usize,
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Buffer { need: usize, got: usize },
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

type FfiResult = std::result::Result<(), Fail>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AeStatus {
    match e {
        Error::Domain(_) => AeStatus::Domain,
        Error::InvalidState(_) => AeStatus::InvalidState,
        Error::DimensionMismatch { .. } => AeStatus::DimensionMismatch,
        Error::ModeOutOfRange { .. } => AeStatus::ModeOutOfRange,
        Error::DynamicsOverflow { .. } => AeStatus::DynamicsOverflow,
        Error::NotPeriodic => AeStatus::NotPeriodic,
        Error::NotTimeIndependent => AeStatus::NotTimeIndependent,
        Error::Eigen(_) => AeStatus::Eigen,
        Error::NotAsymptotic { .. } => AeStatus::NotAsymptotic,
        Error::HorizonCap { .. } => AeStatus::HorizonCap,
    }
}

fn guard<F: FnOnce() -> FfiResult>(f: F) -> AeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            AeStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_last_error(format!("null pointer: {name}"));
            AeStatus::NullPointer
        }
        Ok(Err(Fail::Buffer { need, got })) => {
            set_last_error(format!("buffer holds {got} values, {need} needed"));
            AeStatus::BufferTooSmall
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            AeStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn fill(dst: *mut f64, len: usize, src: &[f64], name: &'static str) -> FfiResult {
    if len < src.len() {
        return Err(Fail::Buffer { need: src.len(), got: len });
    }
    if src.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(Fail::Null(name));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ae_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ae_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- states ---------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ae_state_vacuum(n_modes: usize, out_state: *mut *mut AeState) -> AeStatus {
    guard(|| {
        let o = out(out_state, "out_state")?;
        if n_modes == 0 {
            return Err(Error::Domain("vacuum needs at least one mode".into()).into());
        }
        *o = boxed(AeState(GaussianState::vacuum(n_modes)));
        Ok(())
    })
}

/// Displaced squeezed thermal mode with occupation `nu`, squeezing `r` at
/// angle `phi` and displacement `alpha_re + i alpha_im`.
#[no_mangle]
pub unsafe extern "C" fn ae_state_single_mode(
    nu: f64,
    r: f64,
    phi: f64,
    alpha_re: f64,
    alpha_im: f64,
    out_state: *mut *mut AeState,
) -> AeStatus {
    guard(|| {
        let o = out(out_state, "out_state")?;
        let s = gaussian::make_single_mode_state(nu, r, phi, Complex64::new(alpha_re, alpha_im))?;
        *o = boxed(AeState(s));
        Ok(())
    })
}

/// State from a mean of length `2 n_modes` and a row-major covariance of
/// `(2 n_modes)^2` entries.
#[no_mangle]
pub unsafe extern "C" fn ae_state_new(
    n_modes: usize,
    mean: *const f64,
    cov: *const f64,
    out_state: *mut *mut AeState,
) -> AeStatus {
    guard(|| {
        let o = out(out_state, "out_state")?;
        let dim = 2 * n_modes;
        let m = slice(mean, dim, "mean")?;
        let c = slice(cov, dim * dim, "cov")?;
        let s = GaussianState::new(DVector::from_column_slice(m), DMatrix::from_row_slice(dim, dim, c))?;
        *o = boxed(AeState(s));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_state_product(
    states: *const *const AeState,
    count: usize,
    out_state: *mut *mut AeState,
) -> AeStatus {
    guard(|| {
        let o = out(out_state, "out_state")?;
        if count > 0 && states.is_null() {
            return Err(Fail::Null("states"));
        }
        let mut parts = Vec::with_capacity(count);
        for i in 0..count {
            parts.push(get(*states.add(i), "states[i]")?.0.clone());
        }
        *o = boxed(AeState(gaussian::product_state(&parts)?));
        Ok(())
    })
}

/// Marginal of mode `mode` as a new one-mode state.
#[no_mangle]
pub unsafe extern "C" fn ae_state_reduce(
    state: *const AeState,
    mode: usize,
    out_state: *mut *mut AeState,
) -> AeStatus {
    guard(|| {
        let s = get(state, "state")?;
        let o = out(out_state, "out_state")?;
        *o = boxed(AeState(gaussian::reduce_mode(&s.0, mode)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_state_n_modes(state: *const AeState, out_n: *mut usize) -> AeStatus {
    guard(|| {
        *out(out_n, "out_n")? = get(state, "state")?.0.n_modes();
        Ok(())
    })
}

/// Copies the mean into `dst`, which must hold `2 n_modes` values.
#[no_mangle]
pub unsafe extern "C" fn ae_state_mean(state: *const AeState, dst: *mut f64, len: usize) -> AeStatus {
    guard(|| fill(dst, len, get(state, "state")?.0.mean().as_slice(), "dst"))
}

/// Copies the row-major covariance into `dst`, which must hold
/// `(2 n_modes)^2` values.
#[no_mangle]
pub unsafe extern "C" fn ae_state_cov(state: *const AeState, dst: *mut f64, len: usize) -> AeStatus {
    guard(|| fill(dst, len, &row_major(get(state, "state")?.0.cov()), "dst"))
}

/// Symplectic eigenvalues in ascending order, `n_modes` values.
#[no_mangle]
pub unsafe extern "C" fn ae_state_symplectic_eigenvalues(
    state: *const AeState,
    dst: *mut f64,
    len: usize,
) -> AeStatus {
    guard(|| fill(dst, len, &get(state, "state")?.0.symplectic_eigenvalues()?, "dst"))
}

/// Determinant of a one-mode covariance.
#[no_mangle]
pub unsafe extern "C" fn ae_state_determinant(state: *const AeState, out_det: *mut f64) -> AeStatus {
    guard(|| {
        let s = get(state, "state")?;
        *out(out_det, "out_det")? = gaussian::schrodinger_determinant(&s.0)?;
        Ok(())
    })
}

/// Applies `Z(t, 0)` of `model` to `state`.
#[no_mangle]
pub unsafe extern "C" fn ae_state_evolve(
    state: *const AeState,
    model: *const AeModel,
    t: f64,
    step: f64,
    out_state: *mut *mut AeState,
) -> AeStatus {
    guard(|| {
        let s = get(state, "state")?;
        let m = get(model, "model")?;
        let o = out(out_state, "out_state")?;
        let z = dynamics::propagate_fundamental(&m.0, 0.0, t, step)?;
        *o = boxed(AeState(dynamics::evolve_covariance(&s.0, &z)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_state_free(state: *mut AeState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ae_entropy_from_nu(nu: f64, out_entropy: *mut f64) -> AeStatus {
    guard(|| {
        *out(out_entropy, "out_entropy")? = gaussian::entropy_from_nu(nu)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_entropy_from_determinant(det: f64, out_entropy: *mut f64) -> AeStatus {
    guard(|| {
        *out(out_entropy, "out_entropy")? = gaussian::entropy_from_determinant(det)?;
        Ok(())
    })
}

// ---- models ---------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ae_model_ihe(
    omega1_sq: f64,
    lambda_sq: f64,
    coupling: f64,
    out_model: *mut *mut AeModel,
) -> AeStatus {
    guard(|| {
        let o = out(out_model, "out_model")?;
        *o = boxed(AeModel(QuadraticModel::ihe(omega1_sq, lambda_sq, coupling)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_model_coupled_parametric(
    omega1_sq: f64,
    omega2_sq: f64,
    q: f64,
    g: f64,
    out_model: *mut *mut AeModel,
) -> AeStatus {
    guard(|| {
        let o = out(out_model, "out_model")?;
        *o = boxed(AeModel(QuadraticModel::coupled_parametric(omega1_sq, omega2_sq, q, g)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_model_single_parametric(
    alpha: f64,
    q: f64,
    out_model: *mut *mut AeModel,
) -> AeStatus {
    guard(|| {
        let o = out(out_model, "out_model")?;
        *o = boxed(AeModel(QuadraticModel::single_parametric(alpha, q)?));
        Ok(())
    })
}

/// Periodic stiffness `K0 + sum_k C_k cos(2 pi k t / T) + S_k sin(2 pi k t / T)`.
/// `constant` holds `n_modes^2` values; `cos_terms` and `sin_terms` hold
/// `n_harmonics` such matrices back to back.
#[no_mangle]
pub unsafe extern "C" fn ae_model_custom_periodic(
    n_modes: usize,
    period: f64,
    constant: *const f64,
    n_harmonics: usize,
    cos_terms: *const f64,
    sin_terms: *const f64,
    out_model: *mut *mut AeModel,
) -> AeStatus {
    guard(|| {
        let o = out(out_model, "out_model")?;
        let sq = n_modes * n_modes;
        let k0 = slice(constant, sq, "constant")?;
        let c = slice(cos_terms, sq * n_harmonics, "cos_terms")?;
        let s = slice(sin_terms, sq * n_harmonics, "sin_terms")?;
        let mats = |v: &[f64]| -> Vec<DMatrix<f64>> {
            v.chunks(sq.max(1))
                .take(n_harmonics)
                .map(|c| DMatrix::from_row_slice(n_modes, n_modes, c))
                .collect()
        };
        let custom = CustomPeriodic {
            period,
            constant: DMatrix::from_row_slice(n_modes, n_modes, k0),
            cos_terms: mats(c),
            sin_terms: mats(s),
        };
        *o = boxed(AeModel(QuadraticModel::custom_periodic(custom)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_model_n_modes(model: *const AeModel, out_n: *mut usize) -> AeStatus {
    guard(|| {
        *out(out_n, "out_n")? = get(model, "model")?.0.n_modes();
        Ok(())
    })
}

/// Fails with `AE_STATUS_NOT_PERIODIC` for time-independent models.
#[no_mangle]
pub unsafe extern "C" fn ae_model_period(model: *const AeModel, out_period: *mut f64) -> AeStatus {
    guard(|| {
        let m = get(model, "model")?;
        *out(out_period, "out_period")? = m.0.period().ok_or(Error::NotPeriodic)?;
        Ok(())
    })
}

/// Upper Lyapunov exponent: largest real part of the generator spectrum
/// for constant models, largest `ln|rho| / T` of the monodromy otherwise.
#[no_mangle]
pub unsafe extern "C" fn ae_model_lyapunov(model: *const AeModel, step: f64, out_lyapunov: *mut f64) -> AeStatus {
    guard(|| {
        let m = get(model, "model")?;
        *out(out_lyapunov, "out_lyapunov")? = dynamics::model_lyapunov(&m.0, step)?.lyapunov_upper;
        Ok(())
    })
}

/// Row-major `Z(t1, t0)` into `dst` (`(2 n_modes)^2` values) and its
/// symplectic defect into `out_defect` (may be null).
#[no_mangle]
pub unsafe extern "C" fn ae_model_propagate(
    model: *const AeModel,
    t0: f64,
    t1: f64,
    step: f64,
    dst: *mut f64,
    len: usize,
    out_defect: *mut f64,
) -> AeStatus {
    guard(|| {
        let m = get(model, "model")?;
        let z = dynamics::propagate_fundamental(&m.0, t0, t1, step)?;
        fill(dst, len, &row_major(&z.z), "dst")?;
        if let Some(d) = out_defect.as_mut() {
            *d = z.defect;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_model_free(model: *mut AeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Characteristic exponent of `x'' + (alpha - 2 q cos 2t) x = 0`.
#[no_mangle]
pub unsafe extern "C" fn ae_mathieu_exponent(
    alpha: f64,
    q: f64,
    step: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> AeStatus {
    guard(|| {
        let re = out(out_re, "out_re")?;
        let im = out(out_im, "out_im")?;
        let phi = dynamics::mathieu_characteristic_exponent(alpha, q, step)?;
        *re = phi.re;
        *im = phi.im;
        Ok(())
    })
}

/// Growth rate of the coupled parametric model from its normal modes.
#[no_mangle]
pub unsafe extern "C" fn ae_coupled_lyapunov(model: *const AeModel, step: f64, out_lyapunov: *mut f64) -> AeStatus {
    guard(|| {
        let m = get(model, "model")?;
        *out(out_lyapunov, "out_lyapunov")? = dynamics::coupled_lyapunov(&m.0, step)?;
        Ok(())
    })
}

// ---- bath -----------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ae_qbme_nu(params: *const AeQbmeParams, t: f64, out_nu: *mut f64) -> AeStatus {
    guard(|| {
        let p = get(params, "params")?;
        let p = qbme::QbmeParams {
            omega: p.omega,
            k: p.k,
            n_bar: p.n_bar,
            nu0: p.nu0,
            r0: p.r0,
            phi0: p.phi0,
        };
        *out(out_nu, "out_nu")? = qbme::qbme_nu(&p, t)?;
        Ok(())
    })
}

// ---- series and rates -----------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ae_compare_options_default(t_max: f64, step: f64, opts: *mut AeCompareOptions) -> AeStatus {
    guard(|| {
        let c = CompareOptions::new(t_max, step);
        *out(opts, "opts")? = AeCompareOptions {
            t_max,
            step,
            reduced_mode: c.series.reduced_mode,
            tail_fraction: c.tail_fraction,
            horizon_cap: c.horizon_cap,
            max_norm: c.series.max_norm,
        };
        Ok(())
    })
}

fn compare_options(o: &AeCompareOptions) -> CompareOptions {
    let mut c = CompareOptions::new(o.t_max, o.step);
    c.series.reduced_mode = o.reduced_mode;
    c.series.max_norm = o.max_norm;
    c.tail_fraction = o.tail_fraction;
    c.horizon_cap = o.horizon_cap;
    c
}

/// Reduced determinant and entropy of mode `reduced_mode` sampled on the
/// model's default grid up to `t_max`.
#[no_mangle]
pub unsafe extern "C" fn ae_determinant_series(
    model: *const AeModel,
    state: *const AeState,
    t_max: f64,
    step: f64,
    reduced_mode: usize,
    out_series: *mut *mut AeSeries,
) -> AeStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = get(state, "state")?;
        let o = out(out_series, "out_series")?;
        let mut opts = SeriesOptions::new(t_max, step);
        opts.reduced_mode = reduced_mode;
        *o = boxed(AeSeries(analysis::determinant_series_with(&m.0, &s.0, &opts)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_series_len(series: *const AeSeries, out_len: *mut usize) -> AeStatus {
    guard(|| {
        *out(out_len, "out_len")? = get(series, "series")?.0.len();
        Ok(())
    })
}

/// Copies times, determinants and entropies; each buffer holds `len`
/// values and any of them may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn ae_series_copy(
    series: *const AeSeries,
    times: *mut f64,
    det: *mut f64,
    entropy: *mut f64,
    len: usize,
) -> AeStatus {
    guard(|| {
        let s = &get(series, "series")?.0;
        for (dst, src) in [(times, &s.times), (det, &s.det), (entropy, &s.entropy)] {
            if !dst.is_null() {
                fill(dst, len, src, "dst")?;
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ae_series_free(series: *mut AeSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Fits the asymptotic entropy rate and compares it with the upper
/// Lyapunov exponent. When `out_series` is non-null it receives the
/// series the fit used.
#[no_mangle]
pub unsafe extern "C" fn ae_compare_rate(
    model: *const AeModel,
    state: *const AeState,
    opts: *const AeCompareOptions,
    out_report: *mut AeRateReport,
    out_series: *mut *mut AeSeries,
) -> AeStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = get(state, "state")?;
        let o = get(opts, "opts")?;
        let rep = out(out_report, "out_report")?;
        let r = analysis::compare_rate(&m.0, &s.0, &compare_options(o))?;
        *rep = AeRateReport {
            regime: match r.regime {
                Regime::Unstable => AeRegime::Unstable,
                Regime::Stable => AeRegime::Stable,
            },
            lyapunov: r.lyapunov,
            fitted_slope: r.fitted_slope,
            intercept: r.intercept,
            half_log_c20: r.half_log_c20.unwrap_or(f64::NAN),
            relative_error: r.relative_error.unwrap_or(f64::NAN),
            t_max_used: r.t_max_used,
            max_defect: r.series.max_defect,
            window_start: r.window.start,
            window_end: r.window.end,
            n_samples: r.series.len(),
        };
        if let Some(slot) = out_series.as_mut() {
            *slot = boxed(AeSeries(r.series));
        }
        Ok(())
    })
}
