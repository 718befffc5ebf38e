//! Adaptive gradient methods (Adam, AMSGrad, AdamX) run as online convex
//! optimization learners, together with numerical checks of their regret
//! bounds and of the lemmas those bounds rest on.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: vectors, the feasible box and the projection onto it.
//! - [`optimizers`]: hyperparameters, β₁ schedules and the three step rules.
//! - [`harness`]: problem families, the OCO loop, regret traces.
//! - [`verify`]: bound formulas, lemma checks and the sign-flip
//!   counter-example.

pub mod error;
pub mod harness;
pub mod numerics;
pub mod optimizers;
pub mod verify;

pub use error::{Error, Result};
pub use harness::{run_oco, Problem, RecordMode, RegretTrace};
pub use numerics::{FeasibleBox, Vector};
pub use optimizers::{HyperParams, OptimizerKind, OptimizerState, Schedule, StepSize};
