//! Executable number theory and ergodic averages on tori.
//!
//! The crate is organised bottom-up:
//!
//! * [`fixed`]: wrap-around fixed-point angles, the exact carrier for every orbit.
//! * [`arithmetic`]: frequencies, continued fractions, best approximations,
//!   Diophantine classification and Ostrowski numeration.
//! * [`kernels`]: Fourier coefficients, Dirichlet/Fejér/Jackson kernels,
//!   trigonometric approximation and the observable registry.
//! * [`dynamics`]: rotations and the affine skew product, Birkhoff sums,
//!   averaged exponential sums and polynomial-phase character sums.
//! * [`envelopes`]: closed-form rate envelopes and dominating-scale fits.
//! * [`sharpness`]: lacunary lower-bound constructions.
//! * [`harness`]: experiment configuration, sweeps, CSV/JSON output and the
//!   named acceptance scenarios.

pub mod arithmetic;
pub mod dynamics;
pub mod envelopes;
pub mod error;
pub mod fixed;
pub mod harness;
pub mod kernels;
pub mod sharpness;
pub mod stats;
pub mod sum;

pub use error::{Error, Result};
pub use fixed::{Fixed, TorusPoint};
