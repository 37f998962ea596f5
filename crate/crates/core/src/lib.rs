//! Detumbling a small spacecraft with a single-axis magnetic torquer.
//!
//! The crate is organized around the pieces of the closed loop:
//!
//! * [`dynamics`] rigid-body rotational dynamics and quaternion kinematics,
//! * [`orbit`] two-body orbit propagation,
//! * [`magnetics`] the orbit-plane dipole model used on board and an IGRF
//!   spherical-harmonic model used as simulation truth,
//! * [`bdot`] the bang-bang B-dot law with deadband,
//! * [`nmpc`] receding-horizon control solved by continuation/GMRES,
//! * [`controllability`] numeric Lie-bracket rank conditions for the
//!   time-varying single-input system,
//! * [`sim`] the batch simulation harness behind the `detumble` CLI.
//!
//! Data-parallel sweeps (suite runs, rank sweeps) go through [`exec`], which
//! uses rayon when the `parallel` feature is enabled and falls back to plain
//! iterators otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdot;
pub mod controllability;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod magnetics;
pub mod nmpc;
pub mod orbit;
pub mod sim;

pub use error::{Error, Result};

/// Degrees to radians.
pub const DEG: f64 = std::f64::consts::PI / 180.0;
