use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::Vector3;

use super::config::{resolve_igrf, ControllerKind, RunConfig, TruthModel};
use super::{Controller, NoControl, Observation};
use crate::bdot::BdotController;
use crate::dynamics::{kinetic_energy, rk4_step, BodyState, DipoleMoment};
use crate::error::{Error, Result};
use crate::magnetics::{DipoleModel, FieldModel, IgrfModel};
use crate::nmpc::{NmpcController, NmpcTelemetry};
use crate::DEG;

/// One plant-step sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    /// rad/s.
    pub omega: Vector3<f64>,
    pub m_x: f64,
    pub b_body: Vector3<f64>,
    /// Kinetic energy, J.
    pub energy: f64,
    pub f_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The plant or field evaluation failed; the series is partial.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub name: String,
    pub controller: ControllerKind,
    pub truth_model: TruthModel,
    pub initial_omega_dps: [f64; 3],
    pub status: RunStatus,
    pub detumbled: bool,
    pub detumble_time: Option<f64>,
    /// Simulated time reached, s.
    pub end_time: f64,
    /// deg/s.
    pub final_omega_dps: Vector3<f64>,
    pub series: Vec<SeriesRow>,
    pub telemetry: Vec<NmpcTelemetry>,
    /// `∫|m_x| dt`, A·m²·s.
    pub effort: f64,
    pub max_abs_command: f64,
    pub max_f_norm: Option<f64>,
    pub solver_failures: usize,
}

impl RunResult {
    pub fn is_failure(&self) -> bool {
        matches!(self.status, RunStatus::Failed(_))
    }
}

fn truth_model(cfg: &RunConfig) -> Result<Arc<dyn FieldModel>> {
    Ok(match cfg.truth_model {
        TruthModel::Dipole => Arc::new(DipoleModel::new(cfg.orbit)),
        TruthModel::Igrf => Arc::new(IgrfModel::new(
            resolve_igrf(cfg)?,
            cfg.orbit,
            cfg.epoch_year,
            cfg.igrf_degree,
        )?),
    })
}

fn controller(cfg: &RunConfig) -> Result<Box<dyn Controller>> {
    Ok(match cfg.controller {
        ControllerKind::Bdot => Box::new(BdotController::new(cfg.bdot, cfg.seed)),
        ControllerKind::Nmpc => Box::new(NmpcController::new(
            cfg.nmpc.clone(),
            cfg.inertia,
            cfg.orbit,
            cfg.control_period,
        )?),
        ControllerKind::None => Box::new(NoControl),
    })
}

fn m_max(cfg: &RunConfig) -> f64 {
    match cfg.controller {
        ControllerKind::Bdot => cfg.bdot.m_max,
        ControllerKind::Nmpc => cfg.nmpc.m_max,
        ControllerKind::None => 0.0,
    }
}

/// Simulate one closed-loop case.
///
/// Configuration problems are returned as errors; failures during the
/// simulation produce a [`RunStatus::Failed`] result carrying the partial series.
pub fn run_case(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let truth = truth_model(cfg)?;
    let mut ctrl = controller(cfg)?;
    let h = cfg.plant_step;
    let per_control = cfg.steps_per_control();
    let max_steps = (cfg.max_duration / h).round() as usize;
    let threshold = cfg.termination();
    let limit = m_max(cfg);

    let mut result = RunResult {
        name: cfg.name.clone(),
        controller: cfg.controller,
        truth_model: cfg.truth_model,
        initial_omega_dps: cfg.initial_omega_dps,
        status: RunStatus::Completed,
        detumbled: false,
        detumble_time: None,
        end_time: 0.0,
        final_omega_dps: cfg.initial_omega() / DEG,
        series: Vec::with_capacity(max_steps + 1),
        telemetry: Vec::new(),
        effort: 0.0,
        max_abs_command: 0.0,
        max_f_norm: None,
        solver_failures: 0,
    };

    let mut state = BodyState::new(cfg.initial_omega(), cfg.initial_attitude(), 0.0);
    let mut m_x = 0.0;
    let mut f_norm = None;
    let field_error: RefCell<Option<Error>> = RefCell::new(None);
    let field = |t: f64| match truth.field_inertial(t) {
        Ok(b) => b,
        Err(e) => {
            field_error.borrow_mut().get_or_insert(e);
            Vector3::repeat(f64::NAN)
        }
    };

    for k in 0..=max_steps {
        let t = k as f64 * h;
        state.t = t;
        let b_body = state.inertial_to_body(&field(t));
        if let Some(e) = field_error.borrow_mut().take() {
            result.status = RunStatus::Failed(e.to_string());
            break;
        }
        if k % per_control == 0 {
            if state.omega.iter().all(|w| w.abs() < threshold) {
                result.detumbled = true;
                result.detumble_time = Some(t);
                m_x = 0.0;
                f_norm = None;
            } else {
                let obs = Observation {
                    t,
                    omega: state.omega,
                    q: state.q,
                    b_body,
                };
                match ctrl.command(&obs) {
                    Ok(d) => {
                        m_x = d.m_x;
                        f_norm = d.f_norm;
                        if let Some(tel) = d.telemetry {
                            result.solver_failures += tel.failed as usize;
                            result.telemetry.push(tel);
                        }
                    }
                    Err(e) => {
                        result.status = RunStatus::Failed(e.to_string());
                        break;
                    }
                }
                if !(m_x.abs() <= limit) {
                    result.status = RunStatus::Failed(format!("command {m_x} exceeds limit {limit} at t = {t}"));
                    break;
                }
                if let Some(f) = f_norm.filter(|f| f.is_finite()) {
                    result.max_f_norm = Some(result.max_f_norm.map_or(f, |m: f64| m.max(f)));
                }
            }
        }
        result.series.push(SeriesRow {
            t,
            omega: state.omega,
            m_x,
            b_body,
            energy: kinetic_energy(&state.omega, &cfg.inertia),
            f_norm,
        });
        result.end_time = t;
        result.final_omega_dps = state.omega / DEG;
        result.max_abs_command = result.max_abs_command.max(m_x.abs());
        if result.detumbled || k == max_steps {
            break;
        }
        match rk4_step(&state, &cfg.inertia, DipoleMoment(m_x), field, h) {
            Ok(next) if field_error.borrow().is_none() => {
                result.effort += m_x.abs() * h;
                state = next;
            }
            Ok(_) => {
                let e = field_error.borrow_mut().take().expect("checked above");
                result.status = RunStatus::Failed(e.to_string());
                break;
            }
            Err(e) => {
                result.status = RunStatus::Failed(e.to_string());
                break;
            }
        }
    }
    Ok(result)
}
