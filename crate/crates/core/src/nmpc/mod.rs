//! Receding-horizon detumbling control solved by continuation/GMRES.
//!
//! The horizon `[t, t + T_s]` is split into `N` Euler stages of length
//! `Δτ = T_s/N`. The input bound `|m_x| ≤ m_max` is recast with a dummy
//! input `v` as `m_x² + v² − m_max² = 0`, and the stage cost rewards `v`
//! through `−R₂ v`. The first-order conditions of the discretized problem
//! reduce to `F(U, ω, t) = 0` over the stacked vector
//! `U = [m_x,0, v_0, μ_0, …, m_x,N−1, v_N−1, μ_N−1]`. Instead of re-solving
//! it every sample, C/GMRES integrates `dF/dt = −ζF` for `U̇` with
//! matrix-free GMRES.

mod cgmres;
mod gmres;
mod oracle;
mod problem;

pub use cgmres::{cgmres_step, initialize_u, CgmresStep, NmpcController, NmpcTelemetry};
pub use gmres::{gmres, GmresOutcome};
pub use oracle::dense_kkt_oracle;
pub use problem::{hamiltonian, CostateTrajectory, HorizonModel, Problem};

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the controller predicts the body-frame field over its horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonField {
    /// Dipole field at future orbit positions, rotated into the body frame
    /// with the attitude at the start of the horizon.
    #[default]
    FrozenAttitude,
    /// The current body-frame field held constant over the horizon.
    FrozenField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmpcConfig {
    /// Prediction horizon T_s, s.
    pub horizon: f64,
    /// Number of stages N.
    pub stages: usize,
    /// Stage weight diag(Q).
    pub q: [f64; 3],
    /// Terminal weight diag(Q_t).
    pub q_terminal: [f64; 3],
    pub r1: f64,
    pub r2: f64,
    /// A·m².
    pub m_max: f64,
    /// Continuation gain ζ, 1/s.
    pub zeta: f64,
    /// Forward-difference step for directional derivatives.
    pub fd_step: f64,
    /// GMRES subspace limit; `None` means the full 3N.
    pub gmres_max_iter: Option<usize>,
    pub gmres_tol: f64,
    pub horizon_field: HorizonField,
}

impl Default for NmpcConfig {
    fn default() -> Self {
        NmpcConfig {
            horizon: 10.0,
            stages: 10,
            q: [1e4, 1e2, 50.0],
            q_terminal: [1e4, 1e2, 50.0],
            r1: 0.1,
            r2: 0.1,
            m_max: 1.0,
            zeta: 1.0,
            fd_step: 1e-6,
            gmres_max_iter: None,
            gmres_tol: 1e-8,
            horizon_field: HorizonField::FrozenAttitude,
        }
    }
}

impl NmpcConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let ok = self.stages >= 1
            && positive(self.horizon)
            && self.q.iter().chain(&self.q_terminal).all(|&x| positive(x))
            && positive(self.r1)
            && positive(self.r2)
            && positive(self.m_max)
            && positive(self.zeta)
            && positive(self.fd_step)
            && positive(self.gmres_tol)
            && self.gmres_max_iter.is_none_or(|k| k >= 1);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid nmpc section: {self:?}")))
        }
    }

    pub fn stage_length(&self) -> f64 {
        self.horizon / self.stages as f64
    }

    pub fn dim(&self) -> usize {
        3 * self.stages
    }

    pub fn krylov_dim(&self) -> usize {
        self.gmres_max_iter.unwrap_or(self.dim()).min(self.dim())
    }

    pub fn q_vec(&self) -> Vector3<f64> {
        Vector3::from(self.q)
    }

    pub fn q_terminal_vec(&self) -> Vector3<f64> {
        Vector3::from(self.q_terminal)
    }
}

/// Stacked per-stage `(m_x, v, μ)` unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverVector(pub DVector<f64>);

impl SolverVector {
    /// The equilibrium seed `m_x = 0, v = m_max, μ = R₂/(2 m_max)` at every stage.
    pub fn seed(cfg: &NmpcConfig) -> Self {
        let mut u = DVector::zeros(cfg.dim());
        for i in 0..cfg.stages {
            u[3 * i] = 0.0;
            u[3 * i + 1] = cfg.m_max;
            u[3 * i + 2] = cfg.r2 / (2.0 * cfg.m_max);
        }
        SolverVector(u)
    }

    pub fn stages(&self) -> usize {
        self.0.len() / 3
    }

    pub fn m_x(&self, i: usize) -> f64 {
        self.0[3 * i]
    }

    pub fn v(&self, i: usize) -> f64 {
        self.0[3 * i + 1]
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.0[3 * i + 2]
    }

    /// Largest `|m_x² + v² − m_max²|` over the stages.
    pub fn constraint_violation(&self, m_max: f64) -> f64 {
        (0..self.stages())
            .map(|i| (self.m_x(i).powi(2) + self.v(i).powi(2) - m_max * m_max).abs())
            .fold(0.0, f64::max)
    }
}
