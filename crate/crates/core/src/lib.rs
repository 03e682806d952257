//! Numerical exterior calculus, flow dynamics and contact geometry for
//! (projectively) Anosov flows on closed 3-manifolds presented as glued
//! coordinate boxes.
//!
//! The crate is organised bottom-up:
//!
//! * [`fields`]: scalar fields, vector fields and differential forms with
//!   exact (jet) or finite-difference derivatives;
//! * [`manifolds`]: chart models of the 3-torus and of mapping tori of
//!   hyperbolic toral automorphisms, with the built-in flows;
//! * [`dynamics`]: integration, variational equation, splitting estimation,
//!   growth rates and periodic orbits;
//! * [`contact`]: contact forms, Reeb fields, bi-contact pairs, splitting
//!   frames and Cartan-structure checks;
//! * [`verifiers`]: end-to-end harnesses producing [`VerificationReport`]s.

// Negated comparisons such as `!(x > 0.0)` are used on purpose so that NaN
// fails every positivity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contact;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod grid;
pub mod manifolds;
pub mod verifiers;

pub use error::{Error, Result};
pub use fields::{DerivSpec, Jet, KForm, ScalarField, StencilOrder, VectorField};
pub use grid::SampleGrid;
pub use manifolds::{cat_suspension, t3_pa, ChartModel, ModelFlow};
pub use verifiers::{Verdict, VerificationReport, VerifierOptions};

/// A point in chart coordinates.
pub type Point = nalgebra::Vector3<f64>;
