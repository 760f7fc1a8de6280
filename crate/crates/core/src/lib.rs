//! Circuit rewriting with control as a first-class constructor.
//!
//! Two circuit languages share one term representation: vanilla circuits
//! (`qc`: phases, Hadamard, Z-rotations, CNOT) and controllable circuits
//! (`cqc`: phases, Hadamard, and a control constructor `C(-)` that turns any
//! `n`-wire circuit into its controlled version on `1+n` wires). The crate
//! provides:
//!
//! - the diagram AST with arity checking, structural normalization, swap
//!   expansion, path addressing and a syntactic adjoint ([`diagram`]);
//! - a dense unitary interpreter and semantic equivalence checking
//!   ([`semantics`], [`matrix`]);
//! - both languages' relation sets as bidirectional, position-applicable
//!   rewrite rules with proof traces and numeric soundness checks
//!   ([`rules`]);
//! - the Euler-angle rewrite and its parameter formulas ([`euler`]);
//! - control-functor structure: multi-controlled phase builders,
//!   conjugation rewrites, layerization ([`structure`]);
//! - reduction of controllable circuits to a small gate fragment plus the
//!   encode/decode translations between the two languages and an
//!   end-to-end equivalence pipeline ([`translate`]);
//! - semantic-level control variants (alternative controls, points,
//!   compatibility, commutation, exhaustivity) ([`multicontrol`]).
//!
//! Core math is generic over the real scalar (`f32` or `f64`) through the
//! [`num::Real`] trait; the aliases at the crate root fix `f64`, which is
//! what the command-line tool and the test suites use.

pub mod angle;
pub mod diagram;
pub mod error;
pub mod euler;
pub mod gen;
pub mod matrix;
pub mod multicontrol;
pub mod num;
pub mod rules;
pub mod semantics;
pub mod structure;
pub mod term;
pub mod translate;

pub use diagram::Dialect;
pub use error::{Error, Result};

/// Default-precision aliases.
pub type Angle = angle::Angle<f64>;
pub type Diagram = diagram::Diagram<f64>;
pub type CMat = matrix::CMat<f64>;
pub type DenseUnitary = matrix::DenseUnitary<f64>;
pub type Tolerance = matrix::Tolerance<f64>;
pub type EulerParams = euler::EulerParams<f64>;
pub type Rule = rules::Rule<f64>;
pub type RuleInstance = rules::RuleInstance<f64>;
pub type ProofTrace = rules::ProofTrace<f64>;
pub type Bindings = rules::Bindings<f64>;
