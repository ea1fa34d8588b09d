//! Quadratic "limit cycle manifold" reduction for 3-D oscillators with one
//! stable transverse direction.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] defines the λ–ω and Liénard families and evaluates their vector
//!   fields, plus the planar Van der Pol field.
//! * [`manifold`] solves the order-two invariance equations for
//!   `z = h(x, y) = a0 x² + a1 xy + a2 y²`, once by a generic 3×3 solve and once
//!   by closed form, and measures the invariance residual.
//! * [`dynamics`] integrates the full, reduced and polar systems and converts
//!   planar trajectories to unwrapped polar series.
//! * [`analysis`] measures mean radius, angular velocity and radial
//!   oscillation count from simulations, and evaluates the averaged
//!   predictions together with their quadrature oracles.

// Negated comparisons are used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
mod error;
pub mod manifold;
pub mod model;

pub use error::{Error, Result};
