use nalgebra::{DMatrix, DVector};

use super::model::{flow_generator, QuadraticModel};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, SymplecticForm};

/// Default bound on `max |Z_ij|` before propagation is aborted.
pub const DEFAULT_MAX_NORM: f64 = 1e120;

/// Fundamental solution `Z(t1, t0)` of `z' = A(t) z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    pub z: DMatrix<f64>,
    pub t0: f64,
    pub t1: f64,
    /// `max |Z^T J Z - J|` at `t1`.
    pub defect: f64,
}

impl SymplecticMatrix {
    pub fn identity(n_modes: usize, t: f64) -> Self {
        Self {
            z: DMatrix::identity(2 * n_modes, 2 * n_modes),
            t0: t,
            t1: t,
            defect: 0.0,
        }
    }

    pub fn from_matrix(z: DMatrix<f64>, t0: f64, t1: f64) -> Self {
        let defect = SymplecticForm::new(z.nrows() / 2).defect(&z);
        Self { z, t0, t1, defect }
    }

    pub fn n_modes(&self) -> usize {
        self.z.nrows() / 2
    }
}

/// Fixed-step classical RK4 for the matrix ODE `Z' = A(t) Z`.
///
/// Each advance splits the interval into `ceil(dt / step)` equal substeps so
/// requested times are hit exactly.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    model: &'a QuadraticModel,
    step: f64,
    max_norm: f64,
    t0: f64,
    t: f64,
    z: DMatrix<f64>,
    constant: Option<DMatrix<f64>>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a QuadraticModel, t0: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Domain(format!("step {step} must be > 0")));
        }
        if !t0.is_finite() {
            return Err(Error::Domain("non-finite start time".into()));
        }
        let dim = 2 * model.n_modes();
        let constant = model.is_time_independent().then(|| flow_generator(model, t0));
        Ok(Self {
            model,
            step,
            max_norm: DEFAULT_MAX_NORM,
            t0,
            t: t0,
            z: DMatrix::identity(dim, dim),
            constant,
        })
    }

    pub fn with_max_norm(mut self, max_norm: f64) -> Self {
        self.max_norm = max_norm;
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn snapshot(&self) -> SymplecticMatrix {
        SymplecticMatrix::from_matrix(self.z.clone(), self.t0, self.t)
    }

    fn generator(&self, t: f64) -> DMatrix<f64> {
        match &self.constant {
            Some(a) => a.clone(),
            None => flow_generator(self.model, t),
        }
    }

    fn rk4_step(&mut self, h: f64) {
        let t = self.t;
        let a1 = self.generator(t);
        let a2 = self.generator(t + 0.5 * h);
        let a3 = self.generator(t + h);
        let z = &self.z;
        let k1 = &a1 * z;
        let k2 = &a2 * (z + &k1 * (0.5 * h));
        let k3 = &a2 * (z + &k2 * (0.5 * h));
        let k4 = &a3 * (z + &k3 * h);
        self.z += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    }

    /// Advance to `t_target`, calling `observe(t, Z)` after every substep.
    pub fn advance_with<F>(&mut self, t_target: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(f64, &DMatrix<f64>),
    {
        let span = t_target - self.t;
        if !(span >= 0.0) {
            return Err(Error::Domain(format!(
                "cannot propagate backwards from {} to {t_target}",
                self.t
            )));
        }
        if span == 0.0 {
            return Ok(());
        }
        let n = ((span / self.step) - 1e-9).ceil().max(1.0) as u64;
        let h = span / n as f64;
        let start = self.t;
        for i in 1..=n {
            self.rk4_step(h);
            self.t = if i == n { t_target } else { start + i as f64 * h };
            let norm = self.z.amax();
            if !norm.is_finite() || norm > self.max_norm {
                return Err(Error::DynamicsOverflow { time: self.t });
            }
            observe(self.t, &self.z);
        }
        Ok(())
    }

    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        self.advance_with(t_target, |_, _| {})
    }
}

/// `Z(t1, t0)` by fixed-step RK4.
pub fn propagate_fundamental(
    model: &QuadraticModel,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<SymplecticMatrix> {
    if !(t1 >= t0) {
        return Err(Error::Domain(format!("need t1 >= t0, got {t0} > {t1}")));
    }
    let mut prop = Propagator::new(model, t0, step)?;
    prop.advance_to(t1)?;
    Ok(prop.snapshot())
}

/// One-period fundamental matrix `Z(T, 0)`.
pub fn monodromy(model: &QuadraticModel, step: f64) -> Result<SymplecticMatrix> {
    let period = model.period().ok_or(Error::NotPeriodic)?;
    propagate_fundamental(model, 0.0, period, step)
}

/// `mean -> Z mean`, `cov -> Z cov Z^T`.
pub fn evolve_covariance(state: &GaussianState, z: &SymplecticMatrix) -> Result<GaussianState> {
    let z = &z.z;
    let dim = state.mean().len();
    if z.nrows() != dim || z.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: z.nrows(),
        });
    }
    let mean: DVector<f64> = z * state.mean();
    let cov = z * state.cov() * z.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::from_moments(mean, cov)
}
