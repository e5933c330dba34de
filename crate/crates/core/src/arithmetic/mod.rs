//! Continued fractions, best approximations, Diophantine classification and
//! Ostrowski numeration.

pub mod cf;
pub mod classify;
pub mod frequency;
pub mod ostrowski;

pub use crate::fixed::dist_to_z;
pub use cf::{
    exhaustive_best_check, expand_cf, expand_cf_partial, find_convergent_at_scale, gap_lower_bound_check,
    is_best_approximation, sdc_window, ContinuedFraction, GapCheck,
};
pub use classify::{bb_witnesses, classify, sdc_gamma, ClassifyOptions, DiophantineReport, GammaAFit};
pub use frequency::{Frequency, PqSource, Quotient, Repr, Rule};
pub use ostrowski::{ostrowski_digits, reconstruct};
