//! Closed-loop simulation harness.
//!
//! A run couples the RK4 plant, a truth field model (IGRF or dipole), and a
//! sampled controller held constant between control instants. Runs are
//! deterministic for a given [`RunConfig`], and suites fan out over
//! [`crate::exec::Execution`].

mod config;
mod output;
mod run;
mod suite;

pub use config::{resolve_igrf, ControllerKind, RankConfig, RunConfig, TruthModel, DEFAULT_IGRF_FILE, IGRF_DIR_ENV};
pub use output::{
    emit_series, write_field_comparison, write_rank_sweep, write_series_csv, write_svg_plots, write_telemetry_csv,
    SERIES_HEADER,
};
pub use run::{run_case, RunResult, RunStatus, SeriesRow};
pub use suite::{field_compare, rank_sweep_for, run_suite, SuiteReport};

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::Result;
use crate::nmpc::NmpcTelemetry;

/// What a controller sees at a sampling instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t: f64,
    /// Body rate, rad/s.
    pub omega: Vector3<f64>,
    /// Body-to-inertial attitude.
    pub q: UnitQuaternion<f64>,
    /// Measured body-frame field, T.
    pub b_body: Vector3<f64>,
}

/// A controller's output for one control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDecision {
    pub m_x: f64,
    /// Optimality residual norm, for solvers that have one.
    pub f_norm: Option<f64>,
    pub telemetry: Option<NmpcTelemetry>,
}

impl ControlDecision {
    pub fn simple(m_x: f64) -> Self {
        ControlDecision {
            m_x,
            f_norm: None,
            telemetry: None,
        }
    }
}

pub trait Controller: Send {
    fn command(&mut self, obs: &Observation) -> Result<ControlDecision>;
    fn name(&self) -> &'static str;
}

/// Open loop: the torquer is never energized.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoControl;

impl Controller for NoControl {
    fn command(&mut self, _obs: &Observation) -> Result<ControlDecision> {
        Ok(ControlDecision::simple(0.0))
    }

    fn name(&self) -> &'static str {
        "none"
    }
}
