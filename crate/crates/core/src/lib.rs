//! Data-driven controller synthesis for interconnected nonlinear networks.
//!
//! From two sampled input-state trajectories per subsystem, the crate
//! synthesizes local quadratic ISS Lyapunov functions and state-feedback
//! controllers via data-dependent semidefinite feasibility programs, designs
//! integral sliding-mode components that reject matched perturbations,
//! composes the local certificates through a small-gain condition into a
//! network-level control Lyapunov function, and simulates and verifies the
//! resulting closed loop.

pub mod artifact;
pub mod composition;
pub mod dictionary;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod integrate;
pub mod ism;
pub mod linalg;
pub mod model;
pub mod sim;
pub mod synthesis;

mod sdp;

pub use error::{ConstraintFamily, Error, Result};
pub use exec::Parallelism;
