use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Quadratic Hamiltonian `H = p^T p / 2 + x^T K(t) x / 2`, given by its
/// stiffness matrix `K(t)`.
///
/// Equations of motion are `x'' = -K(t) x`. The periodic bundled models use
/// the Mathieu normal form, with the drive entering every oscillator as
/// `-2 q cos(2t)` so that uncoupled limits are exactly
/// `x'' + (alpha - 2 q cos 2t) x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadraticModel {
    /// Regular oscillator coupled to an inverted one:
    /// `K = [[omega1_sq, coupling], [coupling, -lambda_sq]]`.
    Ihe(IheParams),
    /// Two parametric oscillators coupled by `g (x1 - x2)^2 / 2`.
    CoupledParametric(CoupledParams),
    /// `x'' + (alpha - 2 q cos 2t) x = 0`.
    SingleParametric(SingleParams),
    CustomPeriodic(CustomPeriodic),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IheParams {
    pub omega1_sq: f64,
    pub lambda_sq: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledParams {
    pub omega1_sq: f64,
    pub omega2_sq: f64,
    pub q: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleParams {
    pub alpha: f64,
    pub q: f64,
}

/// Periodic stiffness given as a truncated Fourier series,
/// `K(t) = K0 + sum_k [C_k cos(2 pi k t / T) + S_k sin(2 pi k t / T)]`
/// with `k = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomPeriodic {
    pub period: f64,
    pub constant: DMatrix<f64>,
    pub cos_terms: Vec<DMatrix<f64>>,
    pub sin_terms: Vec<DMatrix<f64>>,
}

fn finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("non-finite model parameter".into()))
    }
}

impl QuadraticModel {
    pub fn ihe(omega1_sq: f64, lambda_sq: f64, coupling: f64) -> Result<Self> {
        let m = Self::Ihe(IheParams {
            omega1_sq,
            lambda_sq,
            coupling,
        });
        m.validate()?;
        Ok(m)
    }

    pub fn coupled_parametric(omega1_sq: f64, omega2_sq: f64, q: f64, g: f64) -> Result<Self> {
        let m = Self::CoupledParametric(CoupledParams {
            omega1_sq,
            omega2_sq,
            q,
            g,
        });
        m.validate()?;
        Ok(m)
    }

    pub fn single_parametric(alpha: f64, q: f64) -> Result<Self> {
        let m = Self::SingleParametric(SingleParams { alpha, q });
        m.validate()?;
        Ok(m)
    }

    pub fn custom_periodic(custom: CustomPeriodic) -> Result<Self> {
        let m = Self::CustomPeriodic(custom);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ihe(p) => finite(&[p.omega1_sq, p.lambda_sq, p.coupling]),
            Self::CoupledParametric(p) => {
                finite(&[p.omega1_sq, p.omega2_sq, p.q, p.g])?;
                if !(p.g > 0.0) {
                    return Err(Error::Domain(format!("coupling g = {} must be > 0", p.g)));
                }
                if !(p.omega2_sq > p.omega1_sq) {
                    return Err(Error::Domain(format!(
                        "need omega2_sq > omega1_sq, got {} <= {}",
                        p.omega2_sq, p.omega1_sq
                    )));
                }
                Ok(())
            }
            Self::SingleParametric(p) => finite(&[p.alpha, p.q]),
            Self::CustomPeriodic(c) => {
                if !(c.period > 0.0) || !c.period.is_finite() {
                    return Err(Error::Domain(format!("period {} must be > 0", c.period)));
                }
                let n = c.constant.nrows();
                if n == 0 {
                    return Err(Error::Domain("empty stiffness matrix".into()));
                }
                for m in std::iter::once(&c.constant)
                    .chain(&c.cos_terms)
                    .chain(&c.sin_terms)
                {
                    if m.nrows() != n || m.ncols() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            got: m.nrows().max(m.ncols()),
                        });
                    }
                    finite(m.as_slice())?;
                    if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                        return Err(Error::Domain("stiffness matrix not symmetric".into()));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            Self::Ihe(_) | Self::CoupledParametric(_) => 2,
            Self::SingleParametric(_) => 1,
            Self::CustomPeriodic(c) => c.constant.nrows(),
        }
    }

    /// Driving period, `None` for time-independent models.
    pub fn period(&self) -> Option<f64> {
        match self {
            Self::Ihe(_) => None,
            Self::CoupledParametric(_) | Self::SingleParametric(_) => Some(PI),
            Self::CustomPeriodic(c) => Some(c.period),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.period().is_none()
    }

    pub fn stiffness(&self, t: f64) -> DMatrix<f64> {
        match self {
            Self::Ihe(p) => DMatrix::from_row_slice(
                2,
                2,
                &[p.omega1_sq, p.coupling, p.coupling, -p.lambda_sq],
            ),
            Self::CoupledParametric(p) => {
                let drive = 2.0 * p.q * (2.0 * t).cos();
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        p.omega1_sq + p.g - drive,
                        -p.g,
                        -p.g,
                        p.omega2_sq + p.g - drive,
                    ],
                )
            }
            Self::SingleParametric(p) => {
                DMatrix::from_element(1, 1, p.alpha - 2.0 * p.q * (2.0 * t).cos())
            }
            Self::CustomPeriodic(c) => {
                let w = 2.0 * PI / c.period;
                let mut k = c.constant.clone();
                for (i, m) in c.cos_terms.iter().enumerate() {
                    k += m * (w * (i + 1) as f64 * t).cos();
                }
                for (i, m) in c.sin_terms.iter().enumerate() {
                    k += m * (w * (i + 1) as f64 * t).sin();
                }
                k
            }
        }
    }

    /// True when mode `mode` has no stiffness coupling to any other mode at
    /// any time, so a product state keeps that mode unentangled.
    pub fn mode_decoupled(&self, mode: usize) -> bool {
        let mats: Vec<DMatrix<f64>> = match self {
            Self::Ihe(p) => return p.coupling == 0.0,
            Self::CoupledParametric(_) | Self::SingleParametric(_) => {
                return self.n_modes() == 1
            }
            Self::CustomPeriodic(c) => std::iter::once(&c.constant)
                .chain(&c.cos_terms)
                .chain(&c.sin_terms)
                .cloned()
                .collect(),
        };
        mats.iter()
            .all(|m| (0..m.nrows()).all(|j| j == mode || (m[(mode, j)] == 0.0 && m[(j, mode)] == 0.0)))
    }

    /// Growth rate of the IHE from the closed-form root of
    /// `(s^2 + omega1_sq)(s^2 - lambda_sq) - coupling^2 = 0`.
    pub fn ihe_growth_rate(&self) -> Option<f64> {
        match self {
            Self::Ihe(p) => {
                let b = p.lambda_sq - p.omega1_sq;
                let disc = (p.lambda_sq + p.omega1_sq).powi(2) + 4.0 * p.coupling * p.coupling;
                let s_sq = 0.5 * (b + disc.sqrt());
                Some(s_sq.max(0.0).sqrt())
            }
            _ => None,
        }
    }
}

/// Generator `A(t)` of `z' = A(t) z` in `(x1, p1, x2, p2, ...)` ordering:
/// `x_i' = p_i`, `p_i' = -sum_j K_ij(t) x_j`. Always traceless.
pub fn flow_generator(model: &QuadraticModel, t: f64) -> DMatrix<f64> {
    let k = model.stiffness(t);
    let n = k.nrows();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(2 * i, 2 * i + 1)] = 1.0;
        for j in 0..n {
            a[(2 * i + 1, 2 * j)] = -k[(i, j)];
        }
    }
    a
}
