//! Explicit finite-time blow-up swirl solutions of the forced axisymmetric
//! Navier–Stokes equations in the unit cylinder, and the numerical machinery
//! that checks them.
//!
//! Modules build on each other in this order: [`numerics`] → [`profiles`] →
//! [`fields`] → [`verify`], [`norms`], [`oracle`]; [`export`] serializes
//! their results.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod export;
pub mod fields;
pub mod norms;
pub mod numerics;
pub mod oracle;
pub mod profiles;
pub mod verify;

pub use error::{Error, Result};
