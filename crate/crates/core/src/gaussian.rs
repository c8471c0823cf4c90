//! Gaussian states in the quadrature representation.
//!
//! Phase-space ordering is `(x1, p1, x2, p2, ...)` with ħ = 1 and the ladder
//! map `a = (x + i p) / sqrt(2)`, so the vacuum covariance is `diag(1/2, 1/2)`.
//! Covariance entries are `sigma_xy = <{x, y}>/2 - <x><y>`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Lower bound on the single-mode Schrödinger determinant.
pub const MIN_DETERMINANT: f64 = 0.25;

/// Slack allowed below [`MIN_DETERMINANT`] and below 1/2 for symplectic
/// eigenvalues before a state is rejected.
pub const UNCERTAINTY_SLACK: f64 = 1e-9;

const SYMMETRY_RTOL: f64 = 1e-12;

/// The canonical form `J` with a `[[0, 1], [-1, 0]]` block per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let dim = 2 * self.n_modes;
        let mut j = DMatrix::zeros(dim, dim);
        for m in 0..self.n_modes {
            j[(2 * m, 2 * m + 1)] = 1.0;
            j[(2 * m + 1, 2 * m)] = -1.0;
        }
        j
    }

    /// Largest entry of `|Z^T J Z - J|`.
    pub fn defect(&self, z: &DMatrix<f64>) -> f64 {
        let j = self.matrix();
        (z.transpose() * &j * z - j).amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state after checking symmetry, finiteness and the
    /// uncertainty principle.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let state = Self::from_moments(mean, cov)?;
        state.check_uncertainty()?;
        Ok(state)
    }

    /// Shape, finiteness and symmetry checks only. Used for states produced
    /// by symplectic evolution, where the uncertainty bound holds by
    /// construction and a numerical re-check on strongly squeezed matrices
    /// would only measure roundoff.
    pub(crate) fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidState(format!(
                "mean vector length {dim} is not a positive even number"
            )));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cov.nrows().max(cov.ncols()),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite moment".into()));
        }
        let scale = cov.amax().max(1.0);
        for i in 0..dim {
            for k in (i + 1)..dim {
                if (cov[(i, k)] - cov[(k, i)]).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::InvalidState(format!(
                        "covariance not symmetric at ({i}, {k})"
                    )));
                }
            }
        }
        Ok(Self {
            n_modes: dim / 2,
            mean,
            cov,
        })
    }

    fn check_uncertainty(&self) -> Result<()> {
        let min = self
            .symplectic_eigenvalues()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < 0.5 - UNCERTAINTY_SLACK {
            return Err(Error::InvalidState(format!(
                "symplectic eigenvalue {min} below 1/2"
            )));
        }
        Ok(())
    }

    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            n_modes,
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * 0.5,
        }
    }

    pub fn thermal(nu: f64) -> Result<Self> {
        make_single_mode_state(nu, 0.0, 0.0, Complex64::new(0.0, 0.0))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Williamson symplectic eigenvalues, ascending, one per mode.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let chol = self.cov.clone().cholesky().ok_or_else(|| {
            Error::InvalidState("covariance is not positive definite".into())
        })?;
        symplectic_eigenvalues_of_factor(&chol.l())
    }
}

/// Symplectic eigenvalues of `cov = F F^T`, ascending, one per mode.
///
/// The antisymmetric `M = F^T J F` is similar to `cov J`, so the eigenvalues
/// of the symmetric `-M^2` are the squared symplectic eigenvalues, each
/// appearing twice. Passing `F = Z L` for an evolved state avoids forming
/// `Z cov Z^T`, whose eigenstructure is badly conditioned once `Z` grows.
pub fn symplectic_eigenvalues_of_factor(f: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = f.nrows();
    if dim == 0 || dim % 2 != 0 || f.ncols() != dim {
        return Err(Error::Domain(format!(
            "factor must be square with even size, got {}x{}",
            f.nrows(),
            f.ncols()
        )));
    }
    let j = SymplecticForm::new(dim / 2).matrix();
    let m = f.transpose() * j * f;
    let neg_sq = -(&m * &m);
    let sym = (&neg_sq + neg_sq.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

/// Single-mode state `D(alpha) S(r, phi) rho_nu S(r, phi)^† D(alpha)^†`.
///
/// The squeezer acts on quadratures as the symmetric symplectic matrix
/// `[[c + s cos phi, s sin phi], [s sin phi, c - s cos phi]]` with
/// `c = cosh r`, `s = sinh r`; at `phi = 0` the x quadrature is stretched
/// by `e^r`.
pub fn make_single_mode_state(nu: f64, r: f64, phi: f64, alpha: Complex64) -> Result<GaussianState> {
    if ![nu, r, phi, alpha.re, alpha.im].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("non-finite state parameter".into()));
    }
    if nu < 0.0 {
        return Err(Error::Domain(format!("thermal occupation {nu} < 0")));
    }
    let (c, s) = (r.cosh(), r.sinh());
    let (cp, sp) = (phi.cos(), phi.sin());
    let squeezer = Matrix2::new(c + s * cp, s * sp, s * sp, c - s * cp);
    let cov2 = squeezer * squeezer.transpose() * (nu + 0.5);
    let mut cov = DMatrix::zeros(2, 2);
    cov.copy_from(&cov2);
    // exact symmetry; the product above can differ in the last bit
    let off = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
    cov[(0, 1)] = off;
    cov[(1, 0)] = off;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mean = DVector::from_vec(vec![sqrt2 * alpha.re, sqrt2 * alpha.im]);
    GaussianState::from_moments(mean, cov)
}

/// Tensor product: block-diagonal covariance, concatenated means.
pub fn product_state(states: &[GaussianState]) -> Result<GaussianState> {
    if states.is_empty() {
        return Err(Error::Domain("product of an empty list of states".into()));
    }
    let n_modes: usize = states.iter().map(|s| s.n_modes).sum();
    let dim = 2 * n_modes;
    let mut mean = DVector::zeros(dim);
    let mut cov = DMatrix::zeros(dim, dim);
    let mut offset = 0;
    for s in states {
        let d = 2 * s.n_modes;
        mean.rows_mut(offset, d).copy_from(&s.mean);
        cov.view_mut((offset, offset), (d, d)).copy_from(&s.cov);
        offset += d;
    }
    Ok(GaussianState { n_modes, mean, cov })
}

/// Partial trace over every mode except `mode_index`.
pub fn reduce_mode(state: &GaussianState, mode_index: usize) -> Result<GaussianState> {
    if mode_index >= state.n_modes {
        return Err(Error::ModeOutOfRange {
            index: mode_index,
            n_modes: state.n_modes,
        });
    }
    let i = 2 * mode_index;
    Ok(GaussianState {
        n_modes: 1,
        mean: state.mean.rows(i, 2).into_owned(),
        cov: state.cov.view((i, i), (2, 2)).into_owned(),
    })
}

/// `D = sigma_pp sigma_qq - sigma_qp^2` of a single-mode state.
pub fn schrodinger_determinant(state: &GaussianState) -> Result<f64> {
    if state.n_modes != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: state.n_modes,
        });
    }
    let c = &state.cov;
    let d = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
    if !(d >= MIN_DETERMINANT - UNCERTAINTY_SLACK) {
        return Err(Error::InvalidState(format!(
            "Schrödinger determinant {d} below 1/4"
        )));
    }
    Ok(d)
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Von Neumann entropy of a thermal mode, `(nu+1) ln(nu+1) - nu ln nu`.
pub fn entropy_from_nu(nu: f64) -> Result<f64> {
    if !(nu >= 0.0) || nu.is_infinite() {
        return Err(Error::Domain(format!("occupation {nu} is not finite and >= 0")));
    }
    if nu < 1.0 {
        return Ok(xlnx(nu + 1.0) - xlnx(nu));
    }
    // same expression regrouped; avoids cancelling two O(nu ln nu) terms
    Ok((nu + 1.0).ln() + nu * (1.0 / nu).ln_1p())
}

/// Entropy of a single-mode Gaussian state from its Schrödinger determinant:
///
/// `S = (d+1)/2 ln(d+1) - (d-1)/2 ln(d-1) - ln 2`,  `d = 2 sqrt(D)`.
///
/// Determinants within [`UNCERTAINTY_SLACK`] below 1/4 are clamped.
pub fn entropy_from_determinant(det: f64) -> Result<f64> {
    if !(det >= MIN_DETERMINANT - UNCERTAINTY_SLACK) || det.is_infinite() {
        return Err(Error::Domain(format!("determinant {det} below 1/4")));
    }
    let det = det.max(MIN_DETERMINANT);
    // h = (d - 1)/2 taken straight from sqrt(D), so d - 1 never cancels;
    // ((d+1) ln(d+1) - (d-1) ln(d-1))/2 - ln 2 = (h+1) ln(h+1) - h ln h
    let h = (det.sqrt() - 0.5).max(0.0);
    if h < 1.0 {
        Ok(xlnx(h + 1.0) - xlnx(h))
    } else {
        Ok((h + 1.0).ln() + h * (1.0 / h).ln_1p())
    }
}
