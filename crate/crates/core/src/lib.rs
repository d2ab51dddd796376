//! Unruh-DeWitt detector transition rates on Schwarzschild-AdS backgrounds.
//!
//! Canonical units fix the AdS radius to one. The crate covers the background
//! geometry, the radial mode problem (series and direct-integration solvers),
//! static and circular-orbit transition rates in the Hartle-Hawking and Boulware
//! states, and resonance analysis of the resulting curves.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod quadrature;
pub mod radial;
pub mod response;

pub use error::{Error, Result};
pub use geometry::{CircularKinematics, Geometry, ScalingReport};
