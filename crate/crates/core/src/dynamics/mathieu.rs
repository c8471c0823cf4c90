//! Mathieu equation `x'' + (alpha - 2 q cos 2t) x = 0` and the coupled
//! parametric oscillators that reduce to it.
//!
//! The characteristic exponent `phi` is defined by monodromy eigenvalues
//! `exp(+-i phi pi)`. The trace fixes `phi` only up to sign and even integers;
//! the remaining integer is taken from the rotation number, so that
//! `phi(alpha, 0) = sqrt(alpha)` for every `alpha > 0` and inside the k-th
//! instability tongue `Re phi = k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::model::{QuadraticModel, SingleParams};
use super::propagate::Propagator;
use crate::error::{Error, Result};

/// Basis pair with `C(0) = 1, C'(0) = 0, S(0) = 0, S'(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathieuBasis {
    pub c: f64,
    pub s: f64,
    pub c_dot: f64,
    pub s_dot: f64,
}

impl MathieuBasis {
    pub fn wronskian(&self) -> f64 {
        self.c * self.s_dot - self.c_dot * self.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MathieuSolution {
    pub alpha: f64,
    pub q: f64,
    pub phi: Complex64,
    step: f64,
}

impl MathieuSolution {
    pub fn new(alpha: f64, q: f64, step: f64) -> Result<Self> {
        let phi = mathieu_characteristic_exponent(alpha, q, step)?;
        Ok(Self { alpha, q, phi, step })
    }

    pub fn basis(&self, t: f64) -> Result<MathieuBasis> {
        mathieu_basis(self.alpha, self.q, t, self.step)
    }

    pub fn is_unstable(&self) -> bool {
        self.phi.im > 0.0
    }
}

fn mathieu_model(alpha: f64, q: f64) -> Result<QuadraticModel> {
    let m = QuadraticModel::SingleParametric(SingleParams { alpha, q });
    m.validate()?;
    Ok(m)
}

fn wrap_angle(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Monodromy of a one-mode model plus the unwrapped angle swept by its
/// first column in the `(x, -p)` plane.
fn monodromy_with_winding(model: &QuadraticModel, step: f64) -> Result<(DMatrix<f64>, f64)> {
    let period = model.period().ok_or(Error::NotPeriodic)?;
    let mut prop = Propagator::new(model, 0.0, step)?;
    let mut last = 0.0_f64;
    let mut winding = 0.0_f64;
    prop.advance_with(period, |_, z| {
        let angle = (-z[(1, 0)]).atan2(z[(0, 0)]);
        winding += wrap_angle(angle - last);
        last = angle;
    })?;
    Ok((prop.matrix().clone(), winding))
}

/// Characteristic exponent from a 2x2 unimodular monodromy and the winding
/// of any solution over one period.
///
/// The winding `F` of a single orbit differs from the rotation number
/// `rho = pi * Re phi` by less than `pi`, and `rho` is known modulo `2 pi`
/// from the monodromy, which pins it down.
pub(crate) fn exponent_from_monodromy(m: &DMatrix<f64>, winding: f64) -> Complex64 {
    let (m11, m12, m21, m22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let c = 0.5 * (m11 + m22);
    let half_diff = 0.5 * (m11 - m22);
    // c^2 - det, formed from entries so that sin(phi pi) keeps full precision
    // near the band edges
    let disc = half_diff * half_diff + m12 * m21;
    if disc > 0.0 {
        let mu = (c.abs() + disc.sqrt()).ln() / PI;
        let parity = if c > 0.0 { 0.0 } else { 1.0 };
        let n = 2.0 * ((winding / PI - parity) / 2.0).round() + parity;
        Complex64::new(n.abs(), mu)
    } else {
        let s = (-disc).sqrt();
        // rotation sense in the (x, -p) plane follows the sign of -M21
        let sin_beta = if m21 > 0.0 { -s } else { s };
        let beta = sin_beta.atan2(c);
        let k = ((winding - beta) / (2.0 * PI)).round();
        let rho = beta + 2.0 * PI * k;
        Complex64::new((rho / PI).abs(), 0.0)
    }
}

/// `phi(alpha, q)` with `Im phi >= 0`; `Im phi > 0` exactly in the
/// instability tongues.
pub fn mathieu_characteristic_exponent(alpha: f64, q: f64, step: f64) -> Result<Complex64> {
    let model = mathieu_model(alpha, q)?;
    let (m, winding) = monodromy_with_winding(&model, step)?;
    Ok(exponent_from_monodromy(&m, winding))
}

pub fn mathieu_basis(alpha: f64, q: f64, t: f64, step: f64) -> Result<MathieuBasis> {
    let model = mathieu_model(alpha, q)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("basis time {t} must be finite and >= 0")));
    }
    let mut prop = Propagator::new(&model, 0.0, step)?;
    prop.advance_to(t)?;
    let z = prop.matrix();
    Ok(MathieuBasis {
        c: z[(0, 0)],
        s: z[(0, 1)],
        c_dot: z[(1, 0)],
        s_dot: z[(1, 1)],
    })
}

/// Normal-mode Mathieu parameters of the coupled oscillators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// Mixing angle, `tan(2 theta) = 2g / (omega2_sq - omega1_sq)`.
    pub theta: f64,
}

pub fn normal_mode_parameters(omega1_sq: f64, omega2_sq: f64, g: f64) -> Result<NormalModes> {
    if ![omega1_sq, omega2_sq, g].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("non-finite normal-mode parameter".into()));
    }
    if !(g > 0.0) {
        return Err(Error::Domain(format!("coupling g = {g} must be > 0")));
    }
    let split = omega2_sq - omega1_sq;
    if !(split > 0.0) {
        return Err(Error::Domain(format!(
            "need omega2_sq > omega1_sq, got {omega2_sq} <= {omega1_sq}"
        )));
    }
    let centre = 0.5 * (omega1_sq + omega2_sq) + g;
    let radius = (g * g + 0.25 * split * split).sqrt();
    Ok(NormalModes {
        alpha_plus: centre + radius,
        alpha_minus: centre - radius,
        theta: 0.5 * (2.0 * g).atan2(split),
    })
}

/// Upper Lyapunov exponent of the coupled parametric model from its two
/// decoupled normal modes: `max |Im phi(alpha_pm, q)|`.
pub fn coupled_lyapunov(model: &QuadraticModel, step: f64) -> Result<f64> {
    let p = match model {
        QuadraticModel::CoupledParametric(p) => *p,
        _ => {
            return Err(Error::Domain(
                "coupled_lyapunov needs a coupled parametric model".into(),
            ))
        }
    };
    model.validate()?;
    let modes = normal_mode_parameters(p.omega1_sq, p.omega2_sq, p.g)?;
    let plus = mathieu_characteristic_exponent(modes.alpha_plus, p.q, step)?;
    let minus = mathieu_characteristic_exponent(modes.alpha_minus, p.q, step)?;
    Ok(plus.im.abs().max(minus.im.abs()))
}
