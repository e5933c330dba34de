//! Fourier coefficients, summability kernels and trigonometric approximation.

pub mod fourier;
pub mod modulus;
pub mod observable;
pub mod registry;
pub mod summability;
pub mod trigpoly;

pub use fourier::{
    approximate, coefficients_up_to, default_quad_points, fc_decay_check, fourier_coefficient, grid_sup_error,
    DecayReport,
};
pub use modulus::ModulusOfContinuity;
pub use observable::{Observable, PointFn};
pub use registry::{lookup, RegistryContext};
pub use summability::{
    dirichlet, dirichlet_direct, fejer, fejer_closed, fejer_poly, jackson, jackson_coefficients, jackson_d,
};
pub use trigpoly::{e_f64, e_fixed, phase, TrigPoly};
