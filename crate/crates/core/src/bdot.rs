//! Bang-bang B-dot detumbling law for a single x-axis torquer.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::DipoleMoment;
use crate::error::{Error, Result};
use crate::sim::{ControlDecision, Controller, Observation};

/// Where the controller gets Ḃ_x from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    /// Backward difference of the last two magnetometer samples.
    #[default]
    FiniteDifference,
    /// `Ḃ ≈ −ω × B` from the true rate and the measured field.
    Idealized,
}

/// How the deadband threshold is compared against `Ḃ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DeadbandMode {
    /// Idle while `|Ḃ_x| < threshold`.
    #[default]
    Absolute,
    /// Idle while `Ḃ_x < threshold`, so only positive rates are acted on.
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BdotConfig {
    /// Maximum dipole, A·m².
    pub m_max: f64,
    /// Deadband on |Ḃ_x|, T/s.
    pub deadband: f64,
    pub deadband_mode: DeadbandMode,
    pub derivative: DerivativeSource,
    /// Magnetometer white noise, T (1σ per axis). Zero disables.
    pub noise_std: f64,
}

impl Default for BdotConfig {
    fn default() -> Self {
        BdotConfig {
            m_max: 1.0,
            deadband: 1e-7,
            deadband_mode: DeadbandMode::Absolute,
            derivative: DerivativeSource::FiniteDifference,
            noise_std: 0.0,
        }
    }
}

impl BdotConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_max > 0.0) || !(self.deadband >= 0.0) || !(self.noise_std >= 0.0) {
            return Err(Error::Config(format!("invalid bdot section: {self:?}")));
        }
        Ok(())
    }
}

/// `m_x = −m_max sign(Ḃ_x)` outside the deadband, zero inside it.
pub fn bdot_command(b_dot_x: f64, cfg: &BdotConfig) -> DipoleMoment {
    let level = match cfg.deadband_mode {
        DeadbandMode::Absolute => b_dot_x.abs(),
        DeadbandMode::OneSided => b_dot_x,
    };
    if !(level >= cfg.deadband) || b_dot_x == 0.0 {
        DipoleMoment(0.0)
    } else {
        DipoleMoment(-cfg.m_max * b_dot_x.signum())
    }
}

/// Backward difference of the x component between two timed samples.
pub fn estimate_bdot(previous: Option<(f64, Vector3<f64>)>, current: (f64, Vector3<f64>)) -> Option<f64> {
    let (t0, b0) = previous?;
    let dt = current.0 - t0;
    (dt > 0.0).then(|| (current.1.x - b0.x) / dt)
}

/// Lyapunov rate `V̇ = ωᵀT` under the idealized law, in closed form
/// `−(m_max/|Ḃ_x|)(ω_y B_z − ω_z B_y)²` with `Ḃ = −ω × B`.
/// Zero when the law sits in its deadband.
pub fn lyapunov_rate_diag(omega: &Vector3<f64>, b_body: &Vector3<f64>, cfg: &BdotConfig) -> f64 {
    let s = omega.y * b_body.z - omega.z * b_body.y;
    let b_dot_x = -s;
    if bdot_command(b_dot_x, cfg).0 == 0.0 {
        return 0.0;
    }
    -(cfg.m_max / b_dot_x.abs()) * s * s
}

/// Sampled B-dot controller holding its two-sample history.
#[derive(Debug, Clone)]
pub struct BdotController {
    pub cfg: BdotConfig,
    previous: Option<(f64, Vector3<f64>)>,
    rng: ChaCha8Rng,
}

impl BdotController {
    pub fn new(cfg: BdotConfig, seed: u64) -> Self {
        BdotController {
            cfg,
            previous: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn measure(&mut self, b: Vector3<f64>) -> Vector3<f64> {
        if self.cfg.noise_std > 0.0 {
            let normal = Normal::new(0.0, self.cfg.noise_std).expect("validated noise level");
            b + Vector3::from_fn(|_, _| normal.sample(&mut self.rng))
        } else {
            b
        }
    }
}

impl Controller for BdotController {
    fn command(&mut self, obs: &Observation) -> Result<ControlDecision> {
        let b = self.measure(obs.b_body);
        let b_dot_x = match self.cfg.derivative {
            DerivativeSource::FiniteDifference => estimate_bdot(self.previous, (obs.t, b)),
            DerivativeSource::Idealized => Some(-obs.omega.cross(&b).x),
        };
        self.previous = Some((obs.t, b));
        let m = b_dot_x.map_or(DipoleMoment(0.0), |d| bdot_command(d, &self.cfg));
        Ok(ControlDecision::simple(m.0))
    }

    fn name(&self) -> &'static str {
        "bdot"
    }
}
