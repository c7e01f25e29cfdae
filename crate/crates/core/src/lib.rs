//! Barotropic FRW cosmologies in conformal time.
//!
//! Closed-form scale factors and Ermakov-Pinney solutions, the
//! Chiellini-damped family built on them, an adaptive integrator for the
//! governing equations, and the derived observables.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chiellini;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod observables;
pub mod ode;
pub mod par;
pub mod params;
pub mod quad;
pub mod roots;
pub mod trajectory;
pub mod validation;

pub use error::{BoundaryReason, Error, Result};
pub use params::{make_fluid, validate_config, Curvature, EPConfig, Fluid, ValidatedConfig, ValidityWindow};
pub use trajectory::Trajectory;
