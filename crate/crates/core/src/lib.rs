//! Numerical laboratory for the n-Laplacian mean field equation
//! `-div(|grad u|^{n-2} grad u) = lambda e^u` on the unit ball and the
//! sharp Moser-Onofri inequality.
//!
//! The crate provides, per module:
//!
//! - [`constants`]: every dimensional constant (sphere measure, sharp
//!   Moser exponent, critical mass, bubble height, quantized single-bubble
//!   mass) and two independent routes to the sharp Moser-Onofri constant;
//! - [`radial_ode`]: a shooting solver for the radial problem, the mean
//!   field solution branch, Pohozaev residuals, blow-up rescaling and
//!   far-field diagnostics;
//! - [`functional`]: the Moser-Onofri functional on radial profiles, the
//!   concentrated bubble family, and the extrapolated concentration limit;
//! - [`minimizer`]: direct variational minimization of the subcritical
//!   functional and the blow-up trace toward the critical mass;
//! - [`capacity`]: closed-form n-capacity, n-modulus, and capacity
//!   potentials for concentric configurations;
//! - [`harmonic_radius`]: Robin function and n-harmonic radius in closed
//!   form, concentration levels, the extremal existence criterion, and the
//!   n-harmonic transplantation check;
//! - [`verify`]: the acceptance checks behind `verify-all`.

// validation guards are written `!(x > 0.0)` on purpose: the negated form
// rejects NaN, which `x <= 0.0` would let through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod constants;
pub mod error;
pub mod functional;
pub mod harmonic_radius;
pub mod minimizer;
pub mod profile;
pub mod quad;
pub mod radial_ode;
pub mod verify;

pub use capacity::AnnulusSpec;
pub use constants::{DimensionConstants, SharpConstant};
pub use error::{Error, Result};
pub use functional::{BubbleSpec, ConcentrationLimit};
pub use harmonic_radius::{DomainSpec, ExistenceVerdict, RobinData, TransplantReport};
pub use minimizer::{BlowupTrace, InitGuess, MinimizeOptions, MinimizeResult};
pub use profile::{GridKind, RadialProfile};
pub use radial_ode::{BranchPoint, RescaledBubble, SolutionBranch};
pub use verify::{CheckResult, VerifyLevel, VerifyReport};
