use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::Vector3;

use super::config::{resolve_igrf, RunConfig, TruthModel};
use super::run::{run_case, RunResult};
use crate::controllability::{rank_sweep, FieldSource, RankSweepReport};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::magnetics::{compare_models, DipoleModel, FieldComparisonRow, IgrfModel};

#[derive(Debug)]
pub struct SuiteEntry {
    pub name: String,
    pub result: Result<RunResult>,
}

#[derive(Debug)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn results(&self) -> impl Iterator<Item = &RunResult> {
        self.entries.iter().filter_map(|e| e.result.as_ref().ok())
    }

    pub fn all_completed(&self) -> bool {
        self.entries
            .iter()
            .all(|e| matches!(&e.result, Ok(r) if !r.is_failure()))
    }

    /// 0 when every case completed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_completed() {
            0
        } else {
            2
        }
    }

    /// Fixed-width table: initial rates, controller, truth model, outcome, effort.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:>10} {:>10} {:<6} {:<6} {:<9} {:>10} {:>12} {:>10} {:>10} {:>10}",
            "case",
            "wx0_dps",
            "wy0_dps",
            "wz0_dps",
            "ctrl",
            "truth",
            "detumbled",
            "time_min",
            "effort_Am2s",
            "wx_end",
            "wy_end",
            "wz_end"
        );
        for e in &self.entries {
            match &e.result {
                Ok(r) => {
                    let [a, b, c] = r.initial_omega_dps;
                    let status = if r.is_failure() {
                        "FAILED"
                    } else if r.detumbled {
                        "yes"
                    } else {
                        "no"
                    };
                    let time = r.detumble_time.map_or("-".to_string(), |t| format!("{:.1}", t / 60.0));
                    let _ = writeln!(
                        out,
                        "{:<16} {:>10.6} {:>10.6} {:>10.6} {:<6} {:<6} {:<9} {:>10} {:>12.1} {:>10.4} {:>10.4} {:>10.4}",
                        r.name,
                        a,
                        b,
                        c,
                        r.controller.as_str(),
                        r.truth_model.as_str(),
                        status,
                        time,
                        r.effort,
                        r.final_omega_dps.x,
                        r.final_omega_dps.y,
                        r.final_omega_dps.z
                    );
                }
                Err(err) => {
                    let _ = writeln!(out, "{:<16} error: {err}", e.name);
                }
            }
        }
        out
    }
}

/// Run every config; one case's error does not stop the others.
pub fn run_suite(configs: &[RunConfig], exec: Execution) -> Result<SuiteReport> {
    if configs.is_empty() {
        return Err(Error::EmptySuite);
    }
    let entries = exec.map(configs, |cfg| SuiteEntry {
        name: cfg.name.clone(),
        result: run_case(cfg),
    });
    Ok(SuiteReport { entries })
}

/// Dipole and IGRF over one orbit of the configured trajectory, 10 s sampling.
pub fn field_compare(cfg: &RunConfig, exec: Execution) -> Result<Vec<FieldComparisonRow>> {
    cfg.validate()?;
    let dipole = DipoleModel::new(cfg.orbit);
    let igrf = IgrfModel::new(resolve_igrf(cfg)?, cfg.orbit, cfg.epoch_year, cfg.igrf_degree)?;
    compare_models(&dipole, &igrf, cfg.orbit.period(), 10.0, exec)
}

/// Controllability sweep over one orbit at a fixed body rate (rad/s).
pub fn rank_sweep_for(cfg: &RunConfig, omega: &Vector3<f64>, exec: Execution) -> Result<RankSweepReport> {
    cfg.validate()?;
    let source = match cfg.rank.field_model {
        TruthModel::Dipole => FieldSource::Model(Arc::new(DipoleModel::new(cfg.orbit))),
        TruthModel::Igrf => FieldSource::Model(Arc::new(IgrfModel::new(
            resolve_igrf(cfg)?,
            cfg.orbit,
            cfg.epoch_year,
            cfg.igrf_degree,
        )?)),
    };
    rank_sweep(
        cfg.inertia,
        &source,
        cfg.orbit.period(),
        cfg.rank.samples,
        omega,
        cfg.rank.tol,
        exec,
    )
}
