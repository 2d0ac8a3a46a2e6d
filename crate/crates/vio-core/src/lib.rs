//! Visual-inertial odometry for high-speed, high-altitude level flight.
//!
//! The crate is organized around four subsystems:
//!
//! - [`solver`]: a general minimizer for smooth objectives under linear
//!   equality constraints, following a differential-algebraic gradient flow
//!   with semi-implicit Euler steps and trust-region time-step control.
//! - [`geometry`]: the per-frame localization model — pinhole landmark
//!   observations assembled into a linear constraint, rank-aware reduction
//!   of the level-flight singularity, and the inertial-distance objective.
//! - [`sim`]: synthetic flights, landmark fields, and noisy sensor streams,
//!   plus the pure-INS dead-reckoning baseline.
//! - [`pipeline`]: the per-frame odometry loop tying the above together,
//!   with error metrics against ground truth.
//!
//! [`mod@format`] holds the plain-text problem interchange format used by
//! the CLI `solve` subcommand.

pub mod format;

pub use nalgebra;

pub mod geometry;
pub mod pipeline;
pub mod sim;
pub mod solver;
