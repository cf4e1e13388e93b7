//! Controllability analysis and control synthesis for linear network
//! dynamics `x(t+1) = A x(t) + B_K u(t)`.
//!
//! * [`netmodel`]: networks, generators, file formats, spectral facts.
//! * [`gramian`]: controllability/observability Gramians and minimum-energy inputs.
//! * [`bounds`]: analytic tradeoffs between control energy and number of control nodes.
//! * [`partition`]: spectral partitioning and control-node selection.
//! * [`decoupled`]: certificate matrices and the decoupled control law.

pub mod bounds;
pub mod cli;
pub mod decoupled;
pub mod error;
pub mod gramian;
pub mod linalg;
pub mod netmodel;
pub mod partition;

pub use error::{Error, Result};
