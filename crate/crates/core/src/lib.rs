//! A laboratory for mean values of multiplicative functions.
//!
//! Every integer up to `x` is factored by a segmented sieve and arbitrary
//! arithmetic functions, given by their values on prime powers, are folded
//! over `[1, x]` in one pass. On top of the exact sums sit the effective
//! main terms and upper bounds of Wirsing and Halasz type, Poisson local
//! laws for `Omega(n; E)`, weighted Gaussian laws for additive functions and
//! a weighted Turan-Kubilius inequality.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod additive;
pub mod arith;
pub mod error;
pub mod estimates;
pub mod local_laws;
pub mod mean_values;
pub mod prime_set;
pub mod random;
pub mod registry;
pub mod sieve;
pub mod special;
pub mod summation;

pub use arith::{builtins, PrimePowerRule, RuleKind};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use prime_set::PrimeSet;
pub use sieve::{PrimePower, PrimePowerFactorization, SegmentPlan, SpfTable, Streaming};
