use nalgebra::{DVector, Rotation3, Vector3};

use super::gmres::gmres;
use super::problem::{HorizonModel, Problem};
use super::{NmpcConfig, SolverVector};
use crate::dynamics::InertiaTensor;
use crate::error::{Error, Result};
use crate::magnetics::{DipoleModel, FieldModel};
use crate::orbit::OrbitElements;
use crate::sim::{ControlDecision, Controller, Observation};

/// Maximum Newton iterations when (re)initializing `U`.
const INIT_MAX_ITER: usize = 100;
/// Target `‖F‖` for the Newton initializer.
pub const INIT_TOL: f64 = 1e-8;

/// One continuation update.
#[derive(Debug, Clone, PartialEq)]
pub struct CgmresStep {
    pub u_dot: DVector<f64>,
    pub u_next: SolverVector,
    /// `‖F(U, ω, t)‖` before the update.
    pub residual_norm: f64,
    pub gmres_iterations: usize,
    pub gmres_residual: f64,
}

/// Per-sample solver record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmpcTelemetry {
    pub t: f64,
    pub m_x: f64,
    pub v0: f64,
    pub mu0: f64,
    pub f_norm: f64,
    pub gmres_iterations: usize,
    /// The solver failed and a zero command was issued.
    pub failed: bool,
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Largest step in `(0, 1]` keeping every dummy input `v_i` positive.
fn positive_branch_step(u: &SolverVector, d: &DVector<f64>) -> f64 {
    (0..u.stages())
        .filter(|&i| d[3 * i + 1] < 0.0)
        .map(|i| 0.95 * u.v(i) / -d[3 * i + 1])
        .fold(1.0, f64::min)
}

/// Solve `F(U, ω, t) = 0` by damped Newton with matrix-free GMRES inner
/// solves, starting from `start` (or the equilibrium seed).
pub fn initialize_u(
    problem: &Problem<'_>,
    omega: &Vector3<f64>,
    t: f64,
    start: Option<SolverVector>,
) -> Result<SolverVector> {
    let cfg = problem.cfg;
    let mut u = start.unwrap_or_else(|| SolverVector::seed(cfg));
    let residual = |u: &SolverVector| problem.residual(u, omega, t);
    let mut f = residual(&u)?;
    let mut norm = f.norm();
    for _ in 0..INIT_MAX_ITER {
        if norm <= INIT_TOL {
            return Ok(u);
        }
        let h = cfg.fd_step;
        let base = f.clone();
        let out = gmres(
            |v| {
                let shifted = SolverVector(&u.0 + v * h);
                Ok((residual(&shifted)? - &base) / h)
            },
            &(-&f),
            &DVector::zeros(cfg.dim()),
            cfg.dim(),
            1e-10,
        )?;
        let d = out.x;
        let mut alpha = positive_branch_step(&u, &d);
        let mut accepted = false;
        for _ in 0..40 {
            let trial = SolverVector(&u.0 + &d * alpha);
            if let Ok(ft) = residual(&trial) {
                let n = ft.norm();
                if n.is_finite() && n <= (1.0 - 1e-4 * alpha) * norm {
                    u = trial;
                    f = ft;
                    norm = n;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm <= INIT_TOL {
        Ok(u)
    } else {
        Err(Error::NewtonNonConvergence {
            iterations: INIT_MAX_ITER,
            residual: norm,
        })
    }
}

/// One C/GMRES update: solve `∂F/∂U U̇ = −ζF − ∂F/∂ω ω̇ − ∂F/∂t` with
/// forward-difference directional derivatives, then `U ← U + U̇ Δt`.
///
/// The time derivative includes the body rotation of the horizon field
/// model over the difference step.
#[allow(clippy::too_many_arguments)]
pub fn cgmres_step(
    problem: &Problem<'_>,
    u: &SolverVector,
    u_dot_guess: &DVector<f64>,
    omega: &Vector3<f64>,
    omega_dot: &Vector3<f64>,
    t: f64,
    dt: f64,
) -> Result<CgmresStep> {
    let cfg = problem.cfg;
    let h = cfg.fd_step;
    let f = problem.residual(u, omega, t)?;
    let omega_h = omega + omega_dot * h;
    let horizon_h = problem.horizon.advanced(omega, h);
    let ahead = Problem::new(cfg, problem.inertia, &horizon_h);
    let f_xt = ahead.residual(u, &omega_h, t + h)?;
    let rhs = -&f * cfg.zeta - (&f_xt - &f) / h;
    let out = gmres(
        |v| {
            let shifted = SolverVector(&u.0 + v * h);
            Ok((ahead.residual(&shifted, &omega_h, t + h)? - &f_xt) / h)
        },
        &rhs,
        u_dot_guess,
        cfg.krylov_dim(),
        cfg.gmres_tol,
    )?;
    let residual_norm = f.norm();
    if !all_finite(&out.x) || !residual_norm.is_finite() {
        return Err(Error::NonFiniteState { t });
    }
    let u_next = SolverVector(&u.0 + &out.x * dt);
    Ok(CgmresStep {
        u_dot: out.x,
        u_next,
        residual_norm,
        gmres_iterations: out.iterations,
        gmres_residual: out.residual_norm,
    })
}

/// Sampled C/GMRES controller.
#[derive(Debug, Clone)]
pub struct NmpcController {
    pub cfg: NmpcConfig,
    inertia: InertiaTensor,
    dipole: DipoleModel,
    orbit_to_inertial: Rotation3<f64>,
    control_period: f64,
    u: Option<SolverVector>,
    u_dot: DVector<f64>,
    failures: usize,
}

impl NmpcController {
    pub fn new(cfg: NmpcConfig, inertia: InertiaTensor, orbit: OrbitElements, control_period: f64) -> Result<Self> {
        cfg.validate()?;
        inertia.validate()?;
        orbit.validate()?;
        let dipole = DipoleModel::new(orbit);
        let n = cfg.dim();
        Ok(NmpcController {
            orbit_to_inertial: dipole.orbit_to_inertial(),
            cfg,
            inertia,
            dipole,
            control_period,
            u: None,
            u_dot: DVector::zeros(n),
            failures: 0,
        })
    }

    /// Current solver vector, if initialized.
    pub fn solver_vector(&self) -> Option<&SolverVector> {
        self.u.as_ref()
    }

    /// Number of samples where the solver failed.
    pub fn failures(&self) -> usize {
        self.failures
    }

    /// The horizon field model for an observation.
    pub fn horizon_for(&self, obs: &Observation) -> HorizonModel {
        HorizonModel {
            dipole: self.dipole,
            orbit_to_body: obs.q.inverse().to_rotation_matrix() * self.orbit_to_inertial,
            mode: self.cfg.horizon_field,
            t_freeze: obs.t,
        }
    }

    fn fail(&mut self, obs: &Observation, f_norm: f64) -> ControlDecision {
        self.failures += 1;
        self.u = None;
        self.u_dot.fill(0.0);
        ControlDecision {
            m_x: 0.0,
            f_norm: Some(f_norm),
            telemetry: Some(NmpcTelemetry {
                t: obs.t,
                m_x: 0.0,
                v0: f64::NAN,
                mu0: f64::NAN,
                f_norm,
                gmres_iterations: 0,
                failed: true,
            }),
        }
    }
}

impl Controller for NmpcController {
    fn command(&mut self, obs: &Observation) -> Result<ControlDecision> {
        let horizon = self.horizon_for(obs);
        let problem = Problem::new(&self.cfg, self.inertia, &horizon);
        let u = match self.u.take() {
            Some(u) => u,
            None => match initialize_u(&problem, &obs.omega, obs.t, None) {
                Ok(u) => u,
                Err(_) => return Ok(self.fail(obs, f64::NAN)),
            },
        };
        let m_cmd = u.m_x(0).clamp(-self.cfg.m_max, self.cfg.m_max);
        let omega_dot = problem.omega_dot(&obs.omega, m_cmd, obs.t)?;
        let step = match cgmres_step(
            &problem,
            &u,
            &self.u_dot,
            &obs.omega,
            &omega_dot,
            obs.t,
            self.control_period,
        ) {
            Ok(s) => s,
            Err(_) => return Ok(self.fail(obs, f64::NAN)),
        };
        let telemetry = NmpcTelemetry {
            t: obs.t,
            m_x: m_cmd,
            v0: u.v(0),
            mu0: u.mu(0),
            f_norm: step.residual_norm,
            gmres_iterations: step.gmres_iterations,
            failed: false,
        };
        self.u = Some(step.u_next);
        self.u_dot = step.u_dot;
        Ok(ControlDecision {
            m_x: m_cmd,
            f_norm: Some(step.residual_norm),
            telemetry: Some(telemetry),
        })
    }

    fn name(&self) -> &'static str {
        "nmpc"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nmpc::problem::tests::horizon;
    use crate::nmpc::HorizonField;
    use crate::DEG;

    #[test]
    fn initializer_converges_from_seed() {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude);
        let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
        let w = Vector3::new(2.429286, 2.878490, -0.366780) * DEG;
        let u = initialize_u(&p, &w, 0.0, None).unwrap();
        assert!(p.residual(&u, &w, 0.0).unwrap().norm() <= INIT_TOL);
        assert!((0..cfg.stages).all(|i| u.v(i) > 0.0 && u.mu(i) > 0.0));
        assert!(u.constraint_violation(cfg.m_max) < 1e-8);
    }

    #[test]
    fn continuation_tracks_rotating_body() {
        // with ω̇ and the body rotation consistent with the model, F stays at
        // the forward-difference floor
        let cfg = NmpcConfig::default();
        let mut hz = horizon(HorizonField::FrozenAttitude);
        let j = InertiaTensor::asymmetric_reference();
        let w = Vector3::new(-1.576299, -0.246907, 2.778531) * DEG;
        let mut u = initialize_u(&Problem::new(&cfg, j, &hz), &w, 0.0, None).unwrap();
        let mut u_dot = DVector::zeros(cfg.dim());
        let mut omega = w;
        let dt = 0.01;
        for k in 0..300 {
            let t = k as f64 * dt;
            let p = Problem::new(&cfg, j, &hz);
            let m = u.m_x(0);
            let wd = p.omega_dot(&omega, m, t).unwrap();
            let s = cgmres_step(&p, &u, &u_dot, &omega, &wd, t, dt).unwrap();
            assert!(s.residual_norm < 1e-4, "step {k}: {}", s.residual_norm);
            u = s.u_next;
            u_dot = s.u_dot;
            hz = hz.advanced(&omega, dt);
            omega += wd * dt;
        }
    }
}
