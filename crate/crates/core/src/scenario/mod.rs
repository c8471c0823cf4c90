//! Scenario runner behind the `anosov-entropy` binary: strict TOML configs,
//! CSV series, JSON summaries and parameter sweeps.

pub mod config;
mod output;
mod sweep;

use std::fmt;
use std::path::Path;

use serde_json::{Map, Value};

use crate::analysis::{
    determinant_series_with, rate_outcome, CompareOptions, EntropySeries, RateOutcome, Regime,
    Sampling, SeriesOptions, STABILITY_THRESHOLD,
};
use crate::dynamics::{
    mathieu_characteristic_exponent, model_lyapunov, normal_mode_parameters, QuadraticModel,
};
use crate::error::Error;
use crate::gaussian::entropy_from_nu;
use crate::qbme::qbme_entropy_series;

pub use config::{Prepared, ScenarioConfig};
pub use output::{format_number, json_number, write_series_csv};
pub use sweep::{run_sweep, SweepResult, SweepRow};

/// Machine-readable failure class; each maps to one exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Io,
    Parse,
    Precondition,
    Overflow,
    HorizonCap,
    Numerical,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Io => 1,
            Self::Parse => 2,
            Self::Precondition => 3,
            Self::Overflow => 4,
            Self::HorizonCap => 5,
            Self::Numerical => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Io => "io",
            Self::Parse => "parse",
            Self::Precondition => "precondition",
            Self::Overflow => "overflow",
            Self::HorizonCap => "horizon_cap",
            Self::Numerical => "numerical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Self {
            category,
            message: message.into(),
        }
    }

    pub fn precondition(e: Error) -> Self {
        Self::new(Category::Precondition, e.to_string())
    }

    /// Errors raised while a validated scenario runs.
    pub fn runtime(e: Error) -> Self {
        let category = match e {
            Error::DynamicsOverflow { .. } => Category::Overflow,
            Error::HorizonCap { .. } => Category::HorizonCap,
            _ => Category::Numerical,
        };
        Self::new(category, e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "category": self.category.name(),
            "exit_code": self.category.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category.name(), self.message)
    }
}

impl std::error::Error for CliError {}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::new(Category::Parse, e.to_string()))
}

pub fn load_config(path: &Path) -> Result<(ScenarioConfig, toml::Table), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(Category::Io, format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    let raw = text
        .parse::<toml::Table>()
        .map_err(|e| CliError::new(Category::Parse, e.to_string()))?;
    Ok((cfg, raw))
}

/// Checks every precondition of a config, including its sweep grid.
pub fn validate_config(cfg: &ScenarioConfig) -> Result<Prepared, CliError> {
    let prepared = cfg.prepare().map_err(CliError::precondition)?;
    if let Some(sweep) = &cfg.sweep {
        sweep::check_axes(sweep)?;
    }
    Ok(prepared)
}

/// Scalar results shared by `run` summaries and sweep rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub lyapunov: Option<f64>,
    pub regime: Option<Regime>,
    pub fitted_slope: Option<f64>,
    pub intercept: Option<f64>,
    pub half_log_c20: Option<f64>,
    pub relative_error: Option<f64>,
    /// `None` when the run completed.
    pub failure: Option<Category>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub series: Option<EntropySeries>,
    pub point: PointSummary,
    pub summary: Map<String, Value>,
    /// Set when the run stopped early but produced partial output.
    pub error: Option<CliError>,
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Unstable => "UNSTABLE",
        Regime::Stable => "STABLE",
    }
}

fn sampling_name(s: Sampling) -> &'static str {
    match s {
        Sampling::Uniform => "uniform",
        Sampling::PeriodMultiples => "period_multiples",
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_number)
}

fn model_json(cfg: &ScenarioConfig) -> Value {
    let mut v = serde_json::to_value(&cfg.model).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut v {
        m.remove("kind");
    }
    output::normalize_numbers(v)
}

fn series_fields(map: &mut Map<String, Value>, s: &EntropySeries) {
    map.insert("sampling".into(), sampling_name(s.sampling).into());
    map.insert("samples".into(), s.len().into());
    map.insert("max_defect".into(), json_number(s.max_defect));
    map.insert("truncated".into(), s.truncated.into());
    map.insert("overflow_time".into(), opt(s.overflow_time));
    map.insert("reduced_mode".into(), s.reduced_mode.into());
    map.insert("entropy_initial".into(), opt(s.entropy.first().copied()));
    map.insert("entropy_final".into(), opt(s.entropy.last().copied()));
}

fn model_extras(map: &mut Map<String, Value>, model: &QuadraticModel, step: f64) -> Result<(), Error> {
    match model {
        QuadraticModel::Ihe(_) => {
            map.insert("closed_form_rate".into(), opt(model.ihe_growth_rate()));
        }
        QuadraticModel::SingleParametric(p) => {
            let phi = mathieu_characteristic_exponent(p.alpha, p.q, step)?;
            map.insert(
                "characteristic_exponent".into(),
                serde_json::json!({ "re": json_number(phi.re), "im": json_number(phi.im) }),
            );
        }
        QuadraticModel::CoupledParametric(p) => {
            let nm = normal_mode_parameters(p.omega1_sq, p.omega2_sq, p.g)?;
            let plus = mathieu_characteristic_exponent(nm.alpha_plus, p.q, step)?;
            let minus = mathieu_characteristic_exponent(nm.alpha_minus, p.q, step)?;
            map.insert(
                "normal_modes".into(),
                serde_json::json!({
                    "alpha_plus": json_number(nm.alpha_plus),
                    "alpha_minus": json_number(nm.alpha_minus),
                    "theta": json_number(nm.theta),
                    "im_phi_plus": json_number(plus.im.abs()),
                    "im_phi_minus": json_number(minus.im.abs()),
                    "lyapunov": json_number(plus.im.abs().max(minus.im.abs())),
                }),
            );
        }
        QuadraticModel::CustomPeriodic(_) => {}
    }
    Ok(())
}

/// Runs a prepared scenario without touching the filesystem.
///
/// Single-mode models conserve the entropy of a pure state, so for them
/// only the Lyapunov exponent is reported; `with_series = false` skips the
/// series there.
pub fn evaluate(
    cfg: &ScenarioConfig,
    prepared: &Prepared,
    with_series: bool,
) -> Result<Evaluation, CliError> {
    let mut summary = Map::new();
    summary.insert("kind".into(), cfg.model.kind().into());
    summary.insert("model".into(), model_json(cfg));
    summary.insert("step".into(), json_number(cfg.integration.step));
    summary.insert("t_max".into(), json_number(cfg.integration.t_max));

    let mut point = PointSummary {
        lyapunov: None,
        regime: None,
        fitted_slope: None,
        intercept: None,
        half_log_c20: None,
        relative_error: None,
        failure: None,
    };
    let mut error = None;

    let series = match prepared {
        Prepared::Qbme { params, grid } => {
            let series = qbme_entropy_series(params, grid).map_err(CliError::runtime)?;
            let asymptotic = entropy_from_nu(params.n_bar).map_err(CliError::runtime)?;
            summary.insert("n_modes".into(), 1.into());
            summary.insert("t_max_used".into(), json_number(cfg.integration.t_max));
            summary.insert("entropy_asymptotic".into(), json_number(asymptotic));
            let nu_final = series.det.last().map(|d| d.sqrt() - 0.5);
            summary.insert("nu_final".into(), opt(nu_final));
            Some(series)
        }
        Prepared::Hamiltonian { model, initial } => {
            let step = cfg.integration.step;
            summary.insert("n_modes".into(), model.n_modes().into());
            summary.insert("horizon_cap".into(), json_number(cfg.horizon_cap()));
            model_extras(&mut summary, model, step).map_err(CliError::runtime)?;
            let mut series_opts = SeriesOptions::new(cfg.integration.t_max, step);
            series_opts.reduced_mode = cfg.analysis.reduced_mode;
            series_opts.sampling = cfg.sampling();
            series_opts.uniform_samples = cfg.analysis.samples;
            series_opts.max_norm = cfg.integration.max_norm;

            if model.n_modes() == 1 {
                let lyapunov = model_lyapunov(model, step)
                    .map_err(CliError::runtime)?
                    .lyapunov_upper;
                point.lyapunov = Some(lyapunov);
                point.regime = Some(if lyapunov > STABILITY_THRESHOLD {
                    Regime::Unstable
                } else {
                    Regime::Stable
                });
                summary.insert("t_max_used".into(), json_number(cfg.integration.t_max));
                if with_series {
                    let s = determinant_series_with(model, initial, &series_opts)
                        .map_err(CliError::runtime)?;
                    if let Some(time) = s.overflow_time {
                        let e = CliError::runtime(Error::DynamicsOverflow { time });
                        point.failure = Some(e.category);
                        error = Some(e);
                    }
                    Some(s)
                } else {
                    None
                }
            } else {
                let opts = CompareOptions {
                    series: series_opts,
                    tail_fraction: cfg.analysis.tail_fraction,
                    horizon_cap: cfg.horizon_cap(),
                };
                match rate_outcome(model, initial, &opts).map_err(CliError::runtime)? {
                    RateOutcome::Fitted(r) => {
                        point.lyapunov = Some(r.lyapunov);
                        point.regime = Some(r.regime);
                        point.fitted_slope = Some(r.fitted_slope);
                        point.intercept = Some(r.intercept);
                        point.half_log_c20 = r.half_log_c20;
                        point.relative_error = r.relative_error;
                        summary.insert("t_max_used".into(), json_number(r.t_max_used));
                        let w = &r.window;
                        let window = if w.is_empty() {
                            Value::Null
                        } else {
                            serde_json::json!({
                                "t_start": json_number(r.series.times[w.start]),
                                "t_end": json_number(r.series.times[w.end - 1]),
                                "samples": w.len(),
                            })
                        };
                        summary.insert("fit_window".into(), window);
                        Some(r.series)
                    }
                    RateOutcome::Incomplete(f) => {
                        point.lyapunov = Some(f.lyapunov);
                        point.regime = Some(Regime::Unstable);
                        summary.insert("t_max_used".into(), json_number(f.t_max_used));
                        let e = CliError::runtime(f.error);
                        point.failure = Some(e.category);
                        error = Some(e);
                        Some(f.series)
                    }
                }
            }
        }
    };

    summary.insert(
        "status".into(),
        point.failure.map_or("ok", Category::name).into(),
    );
    summary.insert("regime".into(), point.regime.map(regime_name).into());
    summary.insert("lyapunov".into(), opt(point.lyapunov));
    summary.insert("fitted_slope".into(), opt(point.fitted_slope));
    summary.insert("intercept".into(), opt(point.intercept));
    summary.insert("half_log_c20".into(), opt(point.half_log_c20));
    summary.insert("relative_error".into(), opt(point.relative_error));
    summary.entry("fit_window").or_insert(Value::Null);
    if let Some(s) = &series {
        series_fields(&mut summary, s);
    }
    if let Some(e) = &error {
        summary.insert("error".into(), e.message.clone().into());
    }
    Ok(Evaluation {
        series,
        point,
        summary,
        error,
    })
}

/// Runs a config and writes the series CSV and the JSON summary into
/// `out_dir`. Preconditions are checked before anything is written; a run
/// cut short by overflow or the horizon cap still writes its partial
/// output and then returns the error.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Evaluation, CliError> {
    let prepared = cfg.prepare().map_err(CliError::precondition)?;
    let eval = evaluate(cfg, &prepared, true)?;
    let io = |e: std::io::Error| CliError::new(Category::Io, format!("{}: {e}", out_dir.display()));
    std::fs::create_dir_all(out_dir).map_err(io)?;
    if let Some(series) = &eval.series {
        write_series_csv(&out_dir.join(&cfg.output.series), series)?;
    }
    output::write_json(&out_dir.join(&cfg.output.summary), &Value::Object(eval.summary.clone()))?;
    match &eval.error {
        Some(e) => Err(e.clone()),
        None => Ok(eval),
    }
}
