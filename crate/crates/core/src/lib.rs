//! Exact distribution theory for the running maximum of sample means of
//! i.i.d. unit-exponential variables.
//!
//! The crate computes the law of `Z_n = max(X̄_1, …, X̄_n)` and of its limit
//! `Z_∞ = sup_i X̄_i`, the shifted family `max_i S_i / (i + λ)`, the
//! generalized Poisson law that falls out of the same power series, and the
//! discrete-time ruin probability of a surplus process with exponential
//! claims. Every closed form has an independent check. The finite-n laws are
//! compared against an exact rational recursion in [`volume`] and the limits
//! against certified series in [`series`], while [`mc`] tests all of them by
//! seeded simulation.
//!
//! Inputs that are an affine image `aY + b` of a unit exponential (`a > 0`)
//! reduce to the unit case by rescaling the abscissa: `P(sup X̄ ≤ x)` equals
//! [`dist::cdf_inf`] at `(x - b) / a`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod dist;
pub mod error;
pub mod genpoisson;
pub mod mc;
pub mod ruin;
pub mod series;
pub mod special_fn;
pub mod verify;
pub mod volume;

pub use error::{Error, Result};
pub use series::SeriesPolicy;
pub use special_fn::BranchPointPolicy;
