use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::model::{flow_generator, QuadraticModel};
use super::propagate::SymplecticMatrix;
use crate::error::{Error, Result};

/// Floquet exponents of a monodromy (or eigenvalues of a constant
/// generator) with the derived upper Lyapunov exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSpectrum {
    /// Sorted by real part, largest first.
    pub exponents: Vec<Complex64>,
    /// Empty for constant-generator spectra.
    pub monodromy_eigenvalues: Vec<Complex64>,
    /// `max(0, max Re mu)`.
    pub lyapunov_upper: f64,
    pub period_used: Option<f64>,
    /// 2-norm condition number of the decomposed matrix.
    pub condition: f64,
}

fn schur_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let eig = schur.complex_eigenvalues();
    Ok(eig.iter().copied().collect())
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn upper(exponents: &[Complex64]) -> f64 {
    exponents.iter().map(|e| e.re).fold(0.0, f64::max)
}

fn sort_desc(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// `mu_j = ln(eig_j(M)) / T` on the principal branch.
pub fn floquet_spectrum(m: &SymplecticMatrix, period: f64) -> Result<FloquetSpectrum> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Domain(format!("period {period} must be > 0")));
    }
    if m.z.nrows() != m.z.ncols() || m.z.nrows() == 0 {
        return Err(Error::Domain("monodromy must be a non-empty square matrix".into()));
    }
    let eig = schur_eigenvalues(&m.z)?;
    if eig.iter().any(|e| e.norm() == 0.0) {
        return Err(Error::Eigen("singular monodromy".into()));
    }
    let mut exponents: Vec<Complex64> = eig.iter().map(|e| e.ln() / period).collect();
    sort_desc(&mut exponents);
    Ok(FloquetSpectrum {
        lyapunov_upper: upper(&exponents),
        exponents,
        monodromy_eigenvalues: eig,
        period_used: Some(period),
        condition: condition_number(&m.z),
    })
}

/// Eigenvalues of the constant generator `A` of a time-independent model.
pub fn constant_generator_spectrum(model: &QuadraticModel) -> Result<FloquetSpectrum> {
    if !model.is_time_independent() {
        return Err(Error::NotTimeIndependent);
    }
    let a = flow_generator(model, 0.0);
    let mut exponents = schur_eigenvalues(&a)?;
    sort_desc(&mut exponents);
    Ok(FloquetSpectrum {
        lyapunov_upper: upper(&exponents),
        exponents,
        monodromy_eigenvalues: Vec::new(),
        period_used: None,
        condition: condition_number(&a),
    })
}

/// Upper Lyapunov exponent of any bundled model: constant-generator
/// spectrum when time independent, monodromy Floquet spectrum otherwise.
pub fn model_lyapunov(model: &QuadraticModel, step: f64) -> Result<FloquetSpectrum> {
    match model.period() {
        None => constant_generator_spectrum(model),
        Some(period) => {
            let m = super::propagate::monodromy(model, step)?;
            floquet_spectrum(&m, period)
        }
    }
}
