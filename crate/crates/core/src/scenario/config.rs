//! Scenario configuration schema. Every table rejects unknown keys.

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::Sampling;
use crate::dynamics::{CustomPeriodic, QuadraticModel, DEFAULT_MAX_NORM};
use crate::error::{Error, Result};
use crate::gaussian::{make_single_mode_state, product_state, GaussianState};
use crate::qbme::QbmeParams;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub integration: IntegrationSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: OutputSpec,
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Qbme {
        omega: f64,
        k: f64,
        n_bar: f64,
        nu0: f64,
        r0: f64,
        #[serde(default)]
        phi0: f64,
    },
    Ihe {
        omega1_sq: f64,
        lambda_sq: f64,
        coupling: f64,
    },
    CoupledParametric {
        omega1_sq: f64,
        omega2_sq: f64,
        q: f64,
        g: f64,
    },
    SingleParametric {
        alpha: f64,
        q: f64,
    },
    CustomPeriodic {
        period: f64,
        constant: Vec<Vec<f64>>,
        #[serde(default)]
        cos_terms: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        sin_terms: Vec<Vec<Vec<f64>>>,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Qbme { .. } => "qbme",
            Self::Ihe { .. } => "ihe",
            Self::CoupledParametric { .. } => "coupled_parametric",
            Self::SingleParametric { .. } => "single_parametric",
            Self::CustomPeriodic { .. } => "custom_periodic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// One entry per mode; empty means vacuum in every mode.
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Defaults to `16 * t_max`.
    pub horizon_cap: Option<f64>,
    #[serde(default = "default_max_norm")]
    pub max_norm: f64,
}

fn default_step() -> f64 {
    1e-3
}

fn default_t_max() -> f64 {
    20.0
}

fn default_max_norm() -> f64 {
    DEFAULT_MAX_NORM
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            step: default_step(),
            t_max: default_t_max(),
            horizon_cap: None,
            max_norm: default_max_norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingSpec {
    #[default]
    Auto,
    Uniform,
    PeriodMultiples,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
    #[serde(default)]
    pub sampling: SamplingSpec,
    /// Uniform intervals on `[0, t_max]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub reduced_mode: usize,
}

fn default_tail_fraction() -> f64 {
    1.0
}

fn default_samples() -> usize {
    400
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            tail_fraction: default_tail_fraction(),
            sampling: SamplingSpec::Auto,
            samples: default_samples(),
            reduced_mode: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Relative to the working directory; `--out-dir` overrides it.
    pub dir: Option<PathBuf>,
    #[serde(default = "default_series")]
    pub series: String,
    #[serde(default = "default_summary")]
    pub summary: String,
    #[serde(default = "default_table")]
    pub table: String,
}

fn default_series() -> String {
    "series.csv".into()
}

fn default_summary() -> String {
    "summary.json".into()
}

fn default_table() -> String {
    "sweep.csv".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            series: default_series(),
            summary: default_summary(),
            table: default_table(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Worker threads; 0 or absent uses every available processor.
    #[serde(default)]
    pub workers: usize,
    pub axes: Vec<AxisSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    /// Dotted key; bare names refer to `[model]`.
    pub param: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

impl AxisSpec {
    pub fn path(&self) -> Vec<String> {
        let full = if self.param.contains('.') {
            self.param.clone()
        } else {
            format!("model.{}", self.param)
        };
        full.split('.').map(str::to_owned).collect()
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let values = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    return Err(Error::Domain(format!("axis {}: points must be >= 1", self.param)));
                }
                if n == 1 {
                    vec![a]
                } else {
                    (0..n)
                        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            }
            _ => {
                return Err(Error::Domain(format!(
                    "axis {}: give either `values` or all of `start`, `stop`, `points`",
                    self.param
                )))
            }
        };
        if values.is_empty() {
            return Err(Error::Domain(format!("axis {} is empty", self.param)));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("axis {} has a non-finite value", self.param)));
        }
        Ok(values)
    }
}

/// A validated scenario ready to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    Qbme {
        params: QbmeParams,
        grid: Vec<f64>,
    },
    Hamiltonian {
        model: QuadraticModel,
        initial: GaussianState,
    },
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Domain(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ScenarioConfig {
    pub fn model(&self) -> Result<Option<QuadraticModel>> {
        Ok(Some(match &self.model {
            ModelSpec::Qbme { .. } => return Ok(None),
            ModelSpec::Ihe {
                omega1_sq,
                lambda_sq,
                coupling,
            } => QuadraticModel::ihe(*omega1_sq, *lambda_sq, *coupling)?,
            ModelSpec::CoupledParametric {
                omega1_sq,
                omega2_sq,
                q,
                g,
            } => QuadraticModel::coupled_parametric(*omega1_sq, *omega2_sq, *q, *g)?,
            ModelSpec::SingleParametric { alpha, q } => {
                QuadraticModel::single_parametric(*alpha, *q)?
            }
            ModelSpec::CustomPeriodic {
                period,
                constant,
                cos_terms,
                sin_terms,
            } => {
                let terms = |list: &[Vec<Vec<f64>>], what: &str| -> Result<Vec<DMatrix<f64>>> {
                    list.iter().map(|m| matrix(m, what)).collect()
                };
                QuadraticModel::custom_periodic(CustomPeriodic {
                    period: *period,
                    constant: matrix(constant, "constant")?,
                    cos_terms: terms(cos_terms, "cos_terms entry")?,
                    sin_terms: terms(sin_terms, "sin_terms entry")?,
                })?
            }
        }))
    }

    fn check_numerics(&self) -> Result<()> {
        let i = &self.integration;
        if !(i.step > 0.0) || !i.step.is_finite() {
            return Err(Error::Domain(format!("integration.step = {} must be > 0", i.step)));
        }
        if !(i.t_max > 0.0) || !i.t_max.is_finite() {
            return Err(Error::Domain(format!("integration.t_max = {} must be > 0", i.t_max)));
        }
        if let Some(cap) = i.horizon_cap {
            if !(cap >= i.t_max) || !cap.is_finite() {
                return Err(Error::Domain(format!(
                    "integration.horizon_cap = {cap} must be >= t_max"
                )));
            }
        }
        if !(i.max_norm > 1.0) {
            return Err(Error::Domain(format!(
                "integration.max_norm = {} must be > 1",
                i.max_norm
            )));
        }
        let a = &self.analysis;
        if !(a.tail_fraction > 0.0 && a.tail_fraction <= 1.0) {
            return Err(Error::Domain(format!(
                "analysis.tail_fraction = {} outside (0, 1]",
                a.tail_fraction
            )));
        }
        if a.samples == 0 {
            return Err(Error::Domain("analysis.samples must be >= 1".into()));
        }
        for name in [&self.output.series, &self.output.summary, &self.output.table] {
            if name.is_empty() {
                return Err(Error::Domain("output file names must be non-empty".into()));
            }
        }
        Ok(())
    }

    pub fn horizon_cap(&self) -> f64 {
        self.integration
            .horizon_cap
            .unwrap_or(16.0 * self.integration.t_max)
    }

    pub fn sampling(&self) -> Option<Sampling> {
        match self.analysis.sampling {
            SamplingSpec::Auto => None,
            SamplingSpec::Uniform => Some(Sampling::Uniform),
            SamplingSpec::PeriodMultiples => Some(Sampling::PeriodMultiples),
        }
    }

    /// Checks every precondition without running anything.
    pub fn prepare(&self) -> Result<Prepared> {
        self.check_numerics()?;
        if let ModelSpec::Qbme {
            omega,
            k,
            n_bar,
            nu0,
            r0,
            phi0,
        } = self.model
        {
            let params = QbmeParams {
                omega,
                k,
                n_bar,
                nu0,
                r0,
                phi0,
            };
            params.validate()?;
            if !self.initial.modes.is_empty() {
                return Err(Error::Domain(
                    "qbme takes its initial state from nu0, r0, phi0; drop [initial]".into(),
                ));
            }
            if self.analysis.sampling == SamplingSpec::PeriodMultiples {
                return Err(Error::Domain("qbme has no period; use uniform sampling".into()));
            }
            if self.analysis.reduced_mode != 0 {
                return Err(Error::ModeOutOfRange {
                    index: self.analysis.reduced_mode,
                    n_modes: 1,
                });
            }
            let n = self.analysis.samples;
            let t_max = self.integration.t_max;
            let grid = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();
            return Ok(Prepared::Qbme { params, grid });
        }

        let model = self.model()?.expect("non-qbme model");
        let n_modes = model.n_modes();
        if self.analysis.reduced_mode >= n_modes {
            return Err(Error::ModeOutOfRange {
                index: self.analysis.reduced_mode,
                n_modes,
            });
        }
        if self.analysis.sampling == SamplingSpec::PeriodMultiples && model.period().is_none() {
            return Err(Error::Domain(format!(
                "{} has no period; use uniform sampling",
                self.model.kind()
            )));
        }
        let initial = if self.initial.modes.is_empty() {
            GaussianState::vacuum(n_modes)
        } else {
            if self.initial.modes.len() != n_modes {
                return Err(Error::DimensionMismatch {
                    expected: n_modes,
                    got: self.initial.modes.len(),
                });
            }
            let modes = self
                .initial
                .modes
                .iter()
                .map(|m| make_single_mode_state(m.nu, m.r, m.phi, Complex64::new(m.alpha_re, m.alpha_im)))
                .collect::<Result<Vec<_>>>()?;
            product_state(&modes)?
        };
        Ok(Prepared::Hamiltonian { model, initial })
    }
}
