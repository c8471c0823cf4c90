//! Reduced-entropy time series for Hamiltonian models and the asymptotic
//! rate fit that is compared against the upper Lyapunov exponent.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::DMatrix;

use crate::dynamics::{model_lyapunov, Propagator, QuadraticModel, DEFAULT_MAX_NORM};
use crate::error::{Error, Result};
use crate::gaussian::{
    entropy_from_determinant, GaussianState, SymplecticForm, MIN_DETERMINANT, UNCERTAINTY_SLACK,
};

/// Tail samples must have `sqrt(D)` above this for the fit; there
/// `S = ln(D)/2 + 1 + O(1/D)`.
pub const ASYMPTOTIC_SQRT_DET: f64 = 10.0;
pub const MIN_TAIL_SAMPLES: usize = 8;
/// Upper exponents at or below this are treated as the stable regime.
pub const STABILITY_THRESHOLD: f64 = 1e-8;
pub const HORIZON_GROWTH: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Uniform,
    /// `t_n = n * tau` with `tau` the multiple of the driving period closest
    /// to `2 pi` (exactly `2 pi` for the bundled `cos 2t` drives).
    PeriodMultiples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub times: Vec<f64>,
    pub det: Vec<f64>,
    pub entropy: Vec<f64>,
    pub sampling: Sampling,
    pub reduced_mode: usize,
    /// Propagation overflowed before `t_max`; samples stop at the last good one.
    pub truncated: bool,
    pub overflow_time: Option<f64>,
    /// Largest symplectic defect seen at a sample.
    pub max_defect: f64,
}

impl EntropySeries {
    pub fn from_determinants(
        times: Vec<f64>,
        det: Vec<f64>,
        sampling: Sampling,
        reduced_mode: usize,
    ) -> Result<Self> {
        if times.len() != det.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: det.len(),
            });
        }
        let entropy = det
            .iter()
            .map(|&d| entropy_from_determinant(d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times,
            det,
            entropy,
            sampling,
            reduced_mode,
            truncated: false,
            overflow_time: None,
            max_defect: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOptions {
    pub t_max: f64,
    pub step: f64,
    pub reduced_mode: usize,
    /// `None` picks period multiples for periodic models, uniform otherwise.
    pub sampling: Option<Sampling>,
    /// Number of uniform intervals on `[0, t_max]`.
    pub uniform_samples: usize,
    pub max_norm: f64,
}

impl SeriesOptions {
    pub fn new(t_max: f64, step: f64) -> Self {
        Self {
            t_max,
            step,
            reduced_mode: 0,
            sampling: None,
            uniform_samples: 400,
            max_norm: DEFAULT_MAX_NORM,
        }
    }
}

/// Spacing of period-multiple samples.
pub fn period_stride(period: f64) -> f64 {
    period * (2.0 * PI / period).round().max(1.0)
}

fn sample_times(model: &QuadraticModel, opts: &SeriesOptions) -> Result<(Vec<f64>, Sampling)> {
    if !(opts.t_max > 0.0) || !opts.t_max.is_finite() {
        return Err(Error::Domain(format!("t_max {} must be > 0", opts.t_max)));
    }
    let sampling = opts.sampling.unwrap_or(match model.period() {
        Some(_) => Sampling::PeriodMultiples,
        None => Sampling::Uniform,
    });
    let times = match sampling {
        Sampling::Uniform => {
            let n = opts.uniform_samples.max(1);
            (0..=n).map(|i| opts.t_max * i as f64 / n as f64).collect()
        }
        Sampling::PeriodMultiples => {
            let period = model.period().ok_or(Error::NotPeriodic)?;
            let stride = period_stride(period);
            let count = (opts.t_max / stride + 1e-9).floor() as usize;
            (0..=count).map(|i| i as f64 * stride).collect()
        }
    };
    Ok((times, sampling))
}

/// Determinant of the `mode` block of `Z cov0 Z^T`, with `cov0 = L L^T`.
///
/// Cauchy–Binet over the 2 x 2n row block of `B = Z L`: the sum of squared
/// 2x2 minors. For unstable flows the block entries grow like `E^2` while
/// the determinant grows like `E^2` as well; expanding via minors keeps the
/// relative rounding error at `eps E` instead of `eps E^2`.
pub fn reduced_determinant(z: &DMatrix<f64>, chol_l: &DMatrix<f64>, mode: usize) -> f64 {
    let b = z.rows(2 * mode, 2) * chol_l;
    let n = b.ncols();
    let mut det = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let minor = b[(0, i)] * b[(1, j)] - b[(0, j)] * b[(1, i)];
            det += minor * minor;
        }
    }
    det
}

/// `D(t)` and `S_r(t)` of one mode of `initial` evolved under `model`.
pub fn determinant_series(
    model: &QuadraticModel,
    initial: &GaussianState,
    t_max: f64,
    step: f64,
    reduced_mode: usize,
) -> Result<EntropySeries> {
    let mut opts = SeriesOptions::new(t_max, step);
    opts.reduced_mode = reduced_mode;
    determinant_series_with(model, initial, &opts)
}

pub fn determinant_series_with(
    model: &QuadraticModel,
    initial: &GaussianState,
    opts: &SeriesOptions,
) -> Result<EntropySeries> {
    if initial.n_modes() != model.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: model.n_modes(),
            got: initial.n_modes(),
        });
    }
    if opts.reduced_mode >= initial.n_modes() {
        return Err(Error::ModeOutOfRange {
            index: opts.reduced_mode,
            n_modes: initial.n_modes(),
        });
    }
    let (times, sampling) = sample_times(model, opts)?;
    let chol = initial
        .cov()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidState("initial covariance not positive definite".into()))?;
    let l = chol.l();
    let form = SymplecticForm::new(model.n_modes());
    let mut prop = Propagator::new(model, 0.0, opts.step)?.with_max_norm(opts.max_norm);

    let mut kept_times = Vec::with_capacity(times.len());
    let mut det = Vec::with_capacity(times.len());
    let mut max_defect: f64 = 0.0;
    let mut overflow_time = None;
    for &t in &times {
        if let Err(e) = prop.advance_to(t) {
            match e {
                Error::DynamicsOverflow { time } => {
                    overflow_time = Some(time);
                    break;
                }
                other => return Err(other),
            }
        }
        let z = prop.matrix();
        max_defect = max_defect.max(form.defect(z));
        let d = reduced_determinant(z, &l, opts.reduced_mode);
        if d < MIN_DETERMINANT - UNCERTAINTY_SLACK {
            return Err(Error::InvalidState(format!(
                "reduced determinant {d} below 1/4 at t = {t}"
            )));
        }
        kept_times.push(t);
        det.push(d);
    }
    let mut series = EntropySeries::from_determinants(kept_times, det, sampling, opts.reduced_mode)?;
    series.truncated = overflow_time.is_some();
    series.overflow_time = overflow_time;
    series.max_defect = max_defect;
    Ok(series)
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Domain("line fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("line fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        residual_rms: (ss / n).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Estimate of the upper Lyapunov exponent.
    pub slope: f64,
    /// Intercept of the entropy line.
    pub intercept: f64,
    /// Intercept of `ln(D)/2` on the same window, i.e. `ln(C20)/2` for
    /// `D ~ C20 exp(2 lambda t)`. The entropy intercept exceeds it by ~1.
    pub half_log_c20: f64,
    /// Sample indices used.
    pub window: Range<usize>,
    pub residual_rms: f64,
}

/// Least-squares line through `(t, S)` over samples with `sqrt(D) > 10`.
///
/// Only the last `tail_fraction` of those samples is used, but never fewer
/// than `MIN_TAIL_SAMPLES`.
pub fn fit_asymptotic_rate(series: &EntropySeries, tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Domain(format!(
            "tail fraction {tail_fraction} outside (0, 1]"
        )));
    }
    let asymptotic: Vec<usize> = (0..series.len())
        .filter(|&i| series.det[i].sqrt() > ASYMPTOTIC_SQRT_DET)
        .collect();
    let keep = ((tail_fraction * asymptotic.len() as f64).ceil() as usize)
        .max(MIN_TAIL_SAMPLES)
        .min(asymptotic.len());
    let usable = &asymptotic[asymptotic.len() - keep..];
    if usable.len() < MIN_TAIL_SAMPLES {
        return Err(Error::NotAsymptotic {
            found: usable.len(),
            required: MIN_TAIL_SAMPLES,
        });
    }
    let ts: Vec<f64> = usable.iter().map(|&i| series.times[i]).collect();
    let ss: Vec<f64> = usable.iter().map(|&i| series.entropy[i]).collect();
    let half_log: Vec<f64> = usable.iter().map(|&i| 0.5 * series.det[i].ln()).collect();
    let line = fit_line(&ts, &ss)?;
    let det_line = fit_line(&ts, &half_log)?;
    Ok(RateFit {
        slope: line.slope,
        intercept: line.intercept,
        half_log_c20: det_line.intercept,
        window: usable[0]..usable[usable.len() - 1] + 1,
        residual_rms: line.residual_rms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Unstable,
    Stable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub series: SeriesOptions,
    pub tail_fraction: f64,
    /// `t_max` grows by `HORIZON_GROWTH` up to this cap until the fit gate is met.
    pub horizon_cap: f64,
}

impl CompareOptions {
    pub fn new(t_max: f64, step: f64) -> Self {
        Self {
            series: SeriesOptions::new(t_max, step),
            tail_fraction: 1.0,
            horizon_cap: 16.0 * t_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub regime: Regime,
    pub lyapunov: f64,
    pub fitted_slope: f64,
    pub intercept: f64,
    /// `None` in the stable regime.
    pub half_log_c20: Option<f64>,
    pub relative_error: Option<f64>,
    /// Sample indices entering the fit.
    pub window: Range<usize>,
    pub t_max_used: f64,
    pub series: EntropySeries,
}

/// A rate comparison that stopped before the fit gate was met. `series` is
/// the last one computed, truncated at the overflow time if there was one.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFailure {
    pub error: Error,
    pub lyapunov: f64,
    pub t_max_used: f64,
    pub series: EntropySeries,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateOutcome {
    Fitted(RateReport),
    Incomplete(RateFailure),
}

/// Fits the asymptotic entropy rate of `model` from `initial` and compares
/// it with the model's upper Lyapunov exponent.
pub fn compare_rate(
    model: &QuadraticModel,
    initial: &GaussianState,
    opts: &CompareOptions,
) -> Result<RateReport> {
    match rate_outcome(model, initial, opts)? {
        RateOutcome::Fitted(report) => Ok(report),
        RateOutcome::Incomplete(failure) => Err(failure.error),
    }
}

/// Like [`compare_rate`] but keeps the partial series when the horizon cap
/// or the overflow bound stops the run.
pub fn rate_outcome(
    model: &QuadraticModel,
    initial: &GaussianState,
    opts: &CompareOptions,
) -> Result<RateOutcome> {
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(Error::Domain(format!(
            "tail fraction {} outside (0, 1]",
            opts.tail_fraction
        )));
    }
    let lyapunov = model_lyapunov(model, opts.series.step)?.lyapunov_upper;
    let mut series_opts = opts.series.clone();

    // a decoupled reduced mode never entangles, whatever the growth rate
    if lyapunov <= STABILITY_THRESHOLD || model.mode_decoupled(series_opts.reduced_mode) {
        let series = determinant_series_with(model, initial, &series_opts)?;
        let line = if series.len() >= 2 {
            fit_line(&series.times, &series.entropy)?
        } else {
            LineFit {
                slope: 0.0,
                intercept: series.entropy.first().copied().unwrap_or(0.0),
                residual_rms: 0.0,
            }
        };
        return Ok(RateOutcome::Fitted(RateReport {
            regime: Regime::Stable,
            lyapunov,
            fitted_slope: line.slope,
            intercept: line.intercept,
            half_log_c20: None,
            relative_error: None,
            window: 0..series.len(),
            t_max_used: series_opts.t_max,
            series,
        }));
    }

    let cap = opts.horizon_cap.max(series_opts.t_max);
    loop {
        let series = determinant_series_with(model, initial, &series_opts)?;
        match fit_asymptotic_rate(&series, opts.tail_fraction) {
            Ok(fit) => {
                return Ok(RateOutcome::Fitted(RateReport {
                    regime: Regime::Unstable,
                    lyapunov,
                    fitted_slope: fit.slope,
                    intercept: fit.intercept,
                    half_log_c20: Some(fit.half_log_c20),
                    relative_error: Some((fit.slope - lyapunov).abs() / lyapunov),
                    window: fit.window,
                    t_max_used: series_opts.t_max,
                    series,
                }))
            }
            Err(Error::NotAsymptotic { .. }) => {
                let error = if let Some(time) = series.overflow_time {
                    Error::DynamicsOverflow { time }
                } else if series_opts.t_max >= cap {
                    Error::HorizonCap { cap }
                } else {
                    series_opts.t_max = (HORIZON_GROWTH * series_opts.t_max).min(cap);
                    continue;
                };
                return Ok(RateOutcome::Incomplete(RateFailure {
                    error,
                    lyapunov,
                    t_max_used: series_opts.t_max,
                    series,
                }));
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_covariance, propagate_fundamental};
    use crate::gaussian::{make_single_mode_state, product_state, reduce_mode, schrodinger_determinant};
    use num_complex::Complex64;

    fn vacuum2() -> GaussianState {
        GaussianState::vacuum(2)
    }

    #[test]
    fn line_fit_exact() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-13);
        assert!(f.residual_rms < 1e-13);
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cauchy_binet_matches_direct_route() {
        let m = QuadraticModel::ihe(1.0, 1.0, 0.5).unwrap();
        let init = product_state(&[
            make_single_mode_state(0.3, 0.4, 0.2, Complex64::new(0.1, 0.0)).unwrap(),
            make_single_mode_state(0.0, -0.2, 1.0, Complex64::new(0.0, 0.0)).unwrap(),
        ])
        .unwrap();
        let l = init.cov().clone().cholesky().unwrap().l();
        for t in [0.0, 0.5, 2.0] {
            let z = propagate_fundamental(&m, 0.0, t, 1e-3).unwrap();
            let evolved = evolve_covariance(&init, &z).unwrap();
            for mode in 0..2 {
                let direct = schrodinger_determinant(&reduce_mode(&evolved, mode).unwrap()).unwrap();
                let cb = reduced_determinant(&z.z, &l, mode);
                assert!((direct - cb).abs() < 1e-11 * direct, "t {t} mode {mode}");
            }
        }
    }

    #[test]
    fn uncoupled_stable_model_keeps_vacuum_pure() {
        let m = QuadraticModel::coupled_parametric(1.0, 4.0, 0.0, 1e-300).unwrap();
        let s = determinant_series(&m, &vacuum2(), 20.0, 1e-3, 1).unwrap();
        for (d, e) in s.det.iter().zip(&s.entropy) {
            assert!((d - 0.25).abs() < 1e-12);
            assert!(e.abs() < 1e-5);
        }
        let ihe0 = QuadraticModel::ihe(1.0, 1.0, 0.0).unwrap();
        let s = determinant_series(&ihe0, &vacuum2(), 5.0, 1e-3, 0).unwrap();
        assert!(s.det.iter().all(|d| (d - 0.25).abs() < 1e-12));
        assert_eq!(s.sampling, Sampling::Uniform);
    }

    #[test]
    fn period_multiple_sampling() {
        let m = QuadraticModel::coupled_parametric(1.0, 4.0, 0.2, 0.3).unwrap();
        let s = determinant_series(&m, &vacuum2(), 20.0 * PI, 1e-3, 0).unwrap();
        assert_eq!(s.sampling, Sampling::PeriodMultiples);
        assert_eq!(s.len(), 11);
        assert!((s.times[10] - 20.0 * PI).abs() < 1e-12);
        assert!((period_stride(PI) - 2.0 * PI).abs() < 1e-15);
        assert!((period_stride(10.0) - 10.0).abs() < 1e-15);
        assert!((period_stride(1.0) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn series_argument_checks() {
        let m = QuadraticModel::ihe(1.0, 1.0, 0.5).unwrap();
        assert!(determinant_series(&m, &GaussianState::vacuum(1), 1.0, 1e-3, 0).is_err());
        assert!(determinant_series(&m, &vacuum2(), 1.0, 1e-3, 2).is_err());
        assert!(determinant_series(&m, &vacuum2(), 0.0, 1e-3, 0).is_err());
        let mut o = SeriesOptions::new(1.0, 1e-3);
        o.sampling = Some(Sampling::PeriodMultiples);
        assert_eq!(determinant_series_with(&m, &vacuum2(), &o), Err(Error::NotPeriodic));
    }

    #[test]
    fn overflow_truncates_series() {
        let m = QuadraticModel::ihe(1.0, 1.0, 0.5).unwrap();
        let mut o = SeriesOptions::new(40.0, 1e-2);
        o.max_norm = 1e8;
        let s = determinant_series_with(&m, &vacuum2(), &o).unwrap();
        assert!(s.truncated);
        let t_over = s.overflow_time.unwrap();
        assert!(*s.times.last().unwrap() <= t_over);
        assert!(t_over < 40.0);
    }

    #[test]
    fn fit_gate_and_tail_fraction() {
        let times: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let det = vec![0.25; 20];
        let s = EntropySeries::from_determinants(times, det, Sampling::Uniform, 0).unwrap();
        assert_eq!(
            fit_asymptotic_rate(&s, 0.5),
            Err(Error::NotAsymptotic { found: 0, required: 8 })
        );
        assert!(fit_asymptotic_rate(&s, 0.0).is_err());
        assert!(fit_asymptotic_rate(&s, 1.5).is_err());
    }

    #[test]
    fn exponential_determinant_gives_exact_rate() {
        let (c, lam) = (3.0_f64, 0.7_f64);
        let times: Vec<f64> = (0..60).map(|i| 5.0 + 0.25 * i as f64).collect();
        let det: Vec<f64> = times.iter().map(|t| c * (2.0 * lam * t).exp()).collect();
        let s = EntropySeries::from_determinants(times, det, Sampling::Uniform, 0).unwrap();
        let half_log: Vec<f64> = s.det.iter().map(|d| 0.5 * d.ln()).collect();
        let f = fit_line(&s.times, &half_log).unwrap();
        assert!((f.slope - lam).abs() < 1e-10);
        let fit = fit_asymptotic_rate(&s, 1.0).unwrap();
        assert!((fit.half_log_c20 - 0.5 * c.ln()).abs() < 1e-10);
        assert!((fit.slope - lam).abs() < 1e-3);
    }
}
