//! Learning dynamics of a one-hidden-layer ReLU classifier.
//!
//! Closed forms and ODE solvers for the logit of a class under binary
//! cross-entropy and hinge loss, the phase diagram of initializations,
//! the logit ODE of deep aligned networks, gradient starvation between two
//! features, and a discrete SGD simulator that checks the continuous-time
//! results against actual training.

pub mod bce;
pub mod deep;
pub mod error;
pub mod hinge;
pub mod ode;
pub mod phase;
pub mod simulator;
pub mod specfn;
pub mod starvation;
pub mod table;

pub use bce::{Branch, ClassLabel, ClassSpec, LogitPoint, ScalarState};
pub use deep::DeepConfig;
pub use error::{Error, Result};
pub use hinge::{BatchClassSummary, HingeState};
pub use ode::{OdeSystem, Trajectory, TrajectoryMeta};
pub use phase::{PhaseKind, PhaseRegion};
pub use starvation::{StarvationConfig, StarvationState};
pub use table::{Cell, Table};
