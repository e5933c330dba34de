//! Orbits, Birkhoff sums and exponential sums for rotations and the affine
//! skew product.

pub mod birkhoff;
pub mod expsum;
pub mod system;

pub use birkhoff::{
    birkhoff_sum, birkhoff_sums_at, default_grid, mean_of, sup_deviation, sup_deviation_schedule, BirkhoffResult,
    SupOptions,
};
pub use expsum::{
    char_birkhoff_skew, exp_sum, exp_sum_avg, exp_sum_avg_abs, exp_sum_direct, kernel_sum, skew_phase_differences,
    CharSum, KernelSum,
};
pub use system::{binomials, SystemKind, SystemSpec};
