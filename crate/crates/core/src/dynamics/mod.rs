//! Quadratic Hamiltonian models and their linear phase-space flows.

mod floquet;
mod mathieu;
mod model;
mod propagate;

pub use floquet::{constant_generator_spectrum, floquet_spectrum, model_lyapunov, FloquetSpectrum};
pub use mathieu::{
    coupled_lyapunov, mathieu_basis, mathieu_characteristic_exponent, normal_mode_parameters,
    MathieuBasis, MathieuSolution, NormalModes,
};
pub use model::{
    flow_generator, CoupledParams, CustomPeriodic, IheParams, QuadraticModel, SingleParams,
};
pub use propagate::{
    evolve_covariance, monodromy, propagate_fundamental, Propagator, SymplecticMatrix,
    DEFAULT_MAX_NORM,
};
