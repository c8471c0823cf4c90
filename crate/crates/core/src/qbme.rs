//! Damped oscillator in a thermal bath under the Born–Markov Lindblad
//! generator, solved in closed form for the two moment combinations the
//! entropy depends on.

use crate::analysis::{EntropySeries, Sampling};
use crate::error::{Error, Result};
use crate::gaussian::entropy_from_nu;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbmeParams {
    /// Oscillator frequency; only rotates `sigma_aa` and never reaches the entropy.
    pub omega: f64,
    /// Damping rate.
    pub k: f64,
    /// Bath occupation.
    pub n_bar: f64,
    pub nu0: f64,
    pub r0: f64,
    pub phi0: f64,
}

impl QbmeParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega, self.k, self.n_bar, self.nu0, self.r0, self.phi0];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite bath parameter".into()));
        }
        if !(self.omega > 0.0) {
            return Err(Error::Domain(format!("omega = {} must be > 0", self.omega)));
        }
        if !(self.k > 0.0) {
            return Err(Error::Domain(format!("damping k = {} must be > 0", self.k)));
        }
        if self.n_bar < 0.0 {
            return Err(Error::Domain(format!("n_bar = {} must be >= 0", self.n_bar)));
        }
        if self.nu0 < 0.0 {
            return Err(Error::Domain(format!("nu0 = {} must be >= 0", self.nu0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbmeMoments {
    /// `sigma_{a^dag a}(t)`.
    pub sigma_adag_a: f64,
    /// `sigma_{a^dag a^dag}(t) sigma_{aa}(t) = |sigma_aa(t)|^2`.
    pub product_term: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time {t} must be finite and >= 0")));
    }
    Ok(())
}

pub fn qbme_second_moments(p: &QbmeParams, t: f64) -> Result<QbmeMoments> {
    p.validate()?;
    check_time(t)?;
    let decay = (-2.0 * p.k * t).exp();
    let width = p.nu0 + 0.5;
    let squeeze = width * (2.0 * p.r0).sinh();
    Ok(QbmeMoments {
        sigma_adag_a: width * (2.0 * p.r0).cosh() * decay
            + (p.n_bar + 0.5) * -(-2.0 * p.k * t).exp_m1(),
        product_term: decay * decay * squeeze * squeeze,
    })
}

/// `nu(t) = sqrt(sigma_{a^dag a}^2 - |sigma_aa|^2) - 1/2`, clamped at 0.
pub fn qbme_nu(p: &QbmeParams, t: f64) -> Result<f64> {
    let m = qbme_second_moments(p, t)?;
    let det = m.sigma_adag_a * m.sigma_adag_a - m.product_term;
    Ok((det.max(0.0).sqrt() - 0.5).max(0.0))
}

/// Entropy series on `grid`; `det` holds `(nu + 1/2)^2`.
pub fn qbme_entropy_series(p: &QbmeParams, grid: &[f64]) -> Result<EntropySeries> {
    if grid.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("time grid must be sorted".into()));
    }
    let mut det = Vec::with_capacity(grid.len());
    let mut entropy = Vec::with_capacity(grid.len());
    for &t in grid {
        let nu = qbme_nu(p, t)?;
        det.push((nu + 0.5) * (nu + 0.5));
        entropy.push(entropy_from_nu(nu)?);
    }
    Ok(EntropySeries {
        times: grid.to_vec(),
        det,
        entropy,
        sampling: Sampling::Uniform,
        reduced_mode: 0,
        truncated: false,
        overflow_time: None,
        max_defect: 0.0,
    })
}
