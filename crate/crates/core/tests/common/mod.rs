#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use detumble::dynamics::{rk4_step, BodyState, DipoleMoment};
use detumble::magnetics::{DipoleModel, FieldModel, IgrfModel};
use detumble::sim::{resolve_igrf, Controller, Observation, RunConfig, TruthModel};
use detumble::Result;

pub const CASES: [u32; 4] = [1, 2, 3, 4];

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// `configs/case{n}_{controller}.toml`.
pub fn case_config(n: u32, controller: &str) -> RunConfig {
    let path = configs_dir().join(format!("case{n}_{controller}.toml"));
    RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn truth(cfg: &RunConfig) -> Arc<dyn FieldModel> {
    match cfg.truth_model {
        TruthModel::Dipole => Arc::new(DipoleModel::new(cfg.orbit)),
        TruthModel::Igrf => {
            Arc::new(IgrfModel::new(resolve_igrf(cfg).unwrap(), cfg.orbit, cfg.epoch_year, cfg.igrf_degree).unwrap())
        }
    }
}

/// Closed loop outside the harness so tests can inspect the controller
/// between samples. `inspect` sees the observation and controller right
/// before each command.
pub fn drive<C, F>(cfg: &RunConfig, ctrl: &mut C, duration: f64, mut inspect: F) -> Result<BodyState>
where
    C: Controller,
    F: FnMut(&Observation, &C),
{
    let field = truth(cfg);
    let h = cfg.plant_step;
    let per_control = cfg.steps_per_control();
    let steps = (duration / h).round() as usize;
    let mut state = BodyState::new(cfg.initial_omega(), cfg.initial_attitude(), 0.0);
    let mut m = 0.0;
    for k in 0..steps {
        let t = k as f64 * h;
        state.t = t;
        if k % per_control == 0 {
            let obs = Observation {
                t,
                omega: state.omega,
                q: state.q,
                b_body: state.inertial_to_body(&field.field_inertial(t)?),
            };
            inspect(&obs, ctrl);
            m = ctrl.command(&obs)?.m_x;
        }
        state = rk4_step(
            &state,
            &cfg.inertia,
            DipoleMoment(m),
            |t| field.field_inertial(t).unwrap(),
            h,
        )?;
    }
    Ok(state)
}
