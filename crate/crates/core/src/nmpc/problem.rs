use nalgebra::{DVector, Rotation3, Vector3};

use super::{HorizonField, NmpcConfig, SolverVector};
use crate::dynamics::{euler_rhs, magnetic_torque, DipoleMoment, InertiaTensor};
use crate::error::{Error, Result};
use crate::magnetics::{DipoleModel, FieldModel};

/// Body-frame field prediction used inside the horizon.
#[derive(Debug, Clone)]
pub struct HorizonModel {
    pub dipole: DipoleModel,
    /// Orbit-plane → body rotation, frozen at the horizon start.
    pub orbit_to_body: Rotation3<f64>,
    pub mode: HorizonField,
    /// Time at which the rotation was frozen (used by `FrozenField`).
    pub t_freeze: f64,
}

impl HorizonModel {
    pub fn field_at(&self, t: f64) -> Result<Vector3<f64>> {
        let t = match self.mode {
            HorizonField::FrozenAttitude => t,
            HorizonField::FrozenField => self.t_freeze,
        };
        Ok(self.orbit_to_body * self.dipole.field_orbital(t)?)
    }

    /// The same model a short time `h` later, with the body turned by `ωh`.
    pub fn advanced(&self, omega: &Vector3<f64>, h: f64) -> HorizonModel {
        HorizonModel {
            orbit_to_body: Rotation3::new(-omega * h) * self.orbit_to_body,
            t_freeze: self.t_freeze + h,
            ..self.clone()
        }
    }

    /// Body-frame field at each stage time `t + iΔτ`, `i = 0..N`.
    pub fn stage_fields(&self, t: f64, cfg: &NmpcConfig) -> Result<Vec<Vector3<f64>>> {
        let dtau = cfg.stage_length();
        (0..cfg.stages).map(|i| self.field_at(t + i as f64 * dtau)).collect()
    }
}

/// Costates `λ_0 … λ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostateTrajectory(pub Vec<Vector3<f64>>);

/// The discretized optimal control problem at one controller instant.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub cfg: &'a NmpcConfig,
    pub inertia: InertiaTensor,
    pub horizon: &'a HorizonModel,
}

/// `f(ω, m_x)` for a given body-frame field.
fn plant(omega: &Vector3<f64>, m_x: f64, b: &Vector3<f64>, j: &InertiaTensor) -> Vector3<f64> {
    euler_rhs(omega, j, &magnetic_torque(DipoleMoment(m_x), b))
}

/// `H_ωᵀ = Qω + (∂f/∂ω)ᵀ λ`. Independent of the input.
fn hamiltonian_omega(omega: &Vector3<f64>, lambda: &Vector3<f64>, q: &Vector3<f64>, j: &InertiaTensor) -> Vector3<f64> {
    let a = (j.jy - j.jz) / j.jx;
    let b = (j.jz - j.jx) / j.jy;
    let c = (j.jx - j.jy) / j.jz;
    let (wx, wy, wz) = (omega.x, omega.y, omega.z);
    // columns of ∂f/∂ω dotted with λ
    Vector3::new(
        q.x * wx + b * wz * lambda.y + c * wy * lambda.z,
        q.y * wy + a * wz * lambda.x + c * wx * lambda.z,
        q.z * wz + a * wy * lambda.x + b * wx * lambda.y,
    )
}

/// `H = ½(ωᵀQω + R₁m²) − R₂v + λᵀf(ω, m) + μ(m² + v² − m_max²)`.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian(
    cfg: &NmpcConfig,
    j: &InertiaTensor,
    b: &Vector3<f64>,
    omega: &Vector3<f64>,
    lambda: &Vector3<f64>,
    m_x: f64,
    v: f64,
    mu: f64,
) -> f64 {
    let q = cfg.q_vec();
    0.5 * (omega.component_mul(&q).dot(omega) + cfg.r1 * m_x * m_x) - cfg.r2 * v
        + lambda.dot(&plant(omega, m_x, b, j))
        + mu * (m_x * m_x + v * v - cfg.m_max * cfg.m_max)
}

impl<'a> Problem<'a> {
    pub fn new(cfg: &'a NmpcConfig, inertia: InertiaTensor, horizon: &'a HorizonModel) -> Self {
        Problem { cfg, inertia, horizon }
    }

    /// Forward-Euler prediction `ω*_{i+1} = ω*_i + f(ω*_i, u_i)Δτ`, `ω*_0 = ω`.
    pub fn predict_states(
        &self,
        omega: &Vector3<f64>,
        u: &SolverVector,
        fields: &[Vector3<f64>],
    ) -> Result<Vec<Vector3<f64>>> {
        let dtau = self.cfg.stage_length();
        let mut states = Vec::with_capacity(self.cfg.stages + 1);
        states.push(*omega);
        for i in 0..self.cfg.stages {
            let w = states[i];
            let next = w + plant(&w, u.m_x(i), &fields[i], &self.inertia) * dtau;
            if !next.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteState {
                    t: self.horizon.t_freeze + (i + 1) as f64 * dtau,
                });
            }
            states.push(next);
        }
        Ok(states)
    }

    /// `λ_N = Q_t ω*_N`, then `λ_i = λ_{i+1} + H_ωᵀ(ω*_i, λ_{i+1}) Δτ`.
    pub fn backward_costates(&self, states: &[Vector3<f64>]) -> CostateTrajectory {
        let n = self.cfg.stages;
        let dtau = self.cfg.stage_length();
        let q = self.cfg.q_vec();
        let mut lambda = vec![Vector3::zeros(); n + 1];
        lambda[n] = states[n].component_mul(&self.cfg.q_terminal_vec());
        for i in (0..n).rev() {
            lambda[i] = lambda[i + 1] + hamiltonian_omega(&states[i], &lambda[i + 1], &q, &self.inertia) * dtau;
        }
        CostateTrajectory(lambda)
    }

    /// Stack the per-stage `[∂H/∂m_x, ∂H/∂v, C]` rows given fields at stage times.
    pub fn residual_with_fields(
        &self,
        u: &SolverVector,
        omega: &Vector3<f64>,
        fields: &[Vector3<f64>],
    ) -> Result<DVector<f64>> {
        let states = self.predict_states(omega, u, fields)?;
        let lambda = self.backward_costates(&states);
        let j = &self.inertia;
        let cfg = self.cfg;
        let mut f = DVector::zeros(cfg.dim());
        for i in 0..cfg.stages {
            let (m, v, mu) = (u.m_x(i), u.v(i), u.mu(i));
            let l = &lambda.0[i + 1];
            let b = &fields[i];
            f[3 * i] = cfg.r1 * m - l.y * b.z / j.jy + l.z * b.y / j.jz + 2.0 * mu * m;
            f[3 * i + 1] = -cfg.r2 + 2.0 * mu * v;
            f[3 * i + 2] = m * m + v * v - cfg.m_max * cfg.m_max;
        }
        Ok(f)
    }

    /// `F(U, ω, t)`.
    pub fn residual(&self, u: &SolverVector, omega: &Vector3<f64>, t: f64) -> Result<DVector<f64>> {
        let fields = self.horizon.stage_fields(t, self.cfg)?;
        self.residual_with_fields(u, omega, &fields)
    }

    /// Model angular acceleration at the current instant.
    pub fn omega_dot(&self, omega: &Vector3<f64>, m_x: f64, t: f64) -> Result<Vector3<f64>> {
        Ok(plant(omega, m_x, &self.horizon.field_at(t)?, &self.inertia))
    }

    /// Discretized cost plus `Σ μ_i C_i Δτ`; its gradient in `U` is `F Δτ`.
    pub fn lagrangian(&self, u: &SolverVector, omega: &Vector3<f64>, t: f64) -> Result<f64> {
        let fields = self.horizon.stage_fields(t, self.cfg)?;
        let states = self.predict_states(omega, u, &fields)?;
        let cfg = self.cfg;
        let q = cfg.q_vec();
        let dtau = cfg.stage_length();
        let n = cfg.stages;
        let mut total = 0.5 * states[n].component_mul(&cfg.q_terminal_vec()).dot(&states[n]);
        for (i, w) in states.iter().take(n).enumerate() {
            let (m, v, mu) = (u.m_x(i), u.v(i), u.mu(i));
            let stage = 0.5 * (w.component_mul(&q).dot(w) + cfg.r1 * m * m) - cfg.r2 * v
                + mu * (m * m + v * v - cfg.m_max * cfg.m_max);
            total += stage * dtau;
        }
        Ok(total)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::orbit::OrbitElements;
    use crate::DEG;
    use approx::assert_relative_eq;

    pub(crate) fn horizon(mode: HorizonField) -> HorizonModel {
        HorizonModel {
            dipole: DipoleModel::new(OrbitElements::aeolus()),
            orbit_to_body: Rotation3::from_euler_angles(0.3, -0.2, 1.1),
            mode,
            t_freeze: 0.0,
        }
    }

    #[test]
    fn equilibrium_prediction_is_zero() {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude);
        let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
        let mut u = SolverVector::seed(&cfg);
        u.0.iter_mut().for_each(|x| *x = 0.0);
        let fields = hz.stage_fields(0.0, &cfg).unwrap();
        let s = p.predict_states(&Vector3::zeros(), &u, &fields).unwrap();
        assert_eq!(s.len(), 11);
        assert!(s.iter().all(|w| *w == Vector3::zeros()));
    }

    #[test]
    fn single_stage_is_one_euler_step() {
        let cfg = NmpcConfig {
            stages: 1,
            horizon: 1.0,
            ..NmpcConfig::default()
        };
        let hz = horizon(HorizonField::FrozenAttitude);
        let j = InertiaTensor::asymmetric_reference();
        let p = Problem::new(&cfg, j, &hz);
        let mut u = SolverVector::seed(&cfg);
        u.0[0] = 0.4;
        let w0 = Vector3::new(0.02, -0.03, 0.01);
        let fields = hz.stage_fields(5.0, &cfg).unwrap();
        let s = p.predict_states(&w0, &u, &fields).unwrap();
        let expected = w0 + euler_rhs(&w0, &j, &magnetic_torque(DipoleMoment(0.4), &fields[0]));
        assert_eq!(s[1], expected);
    }

    #[test]
    fn axisymmetric_body_keeps_predicted_x_rate() {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude);
        let j = InertiaTensor::new(0.02, 0.03, 0.03).unwrap();
        let p = Problem::new(&cfg, j, &hz);
        let mut u = SolverVector::seed(&cfg);
        for i in 0..cfg.stages {
            u.0[3 * i] = (i as f64 * 0.7).sin();
        }
        let fields = hz.stage_fields(100.0, &cfg).unwrap();
        let s = p.predict_states(&Vector3::new(0.04, 0.05, -0.01), &u, &fields).unwrap();
        assert!(s.iter().all(|w| w.x == 0.04));
    }

    #[test]
    fn terminal_costate_examples() {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude);
        let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
        let mut states = vec![Vector3::zeros(); cfg.stages + 1];
        let lam = p.backward_costates(&states);
        assert!(lam.0.iter().all(|l| *l == Vector3::zeros()));
        states[cfg.stages] = Vector3::new(0.01, 0.0, 0.0);
        let lam = p.backward_costates(&states);
        assert_relative_eq!(lam.0[cfg.stages], Vector3::new(100.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn residual_vanishes_at_equilibrium_seed() {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude);
        let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
        let u = SolverVector::seed(&cfg);
        assert_eq!(u.mu(0), 0.05);
        let f = p.residual(&u, &Vector3::zeros(), 0.0).unwrap();
        assert_eq!(f.amax(), 0.0);
    }

    #[test]
    fn constraint_and_dummy_rows() {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude);
        let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
        let mut u = SolverVector::seed(&cfg);
        u.0[3] = 0.3;
        u.0[4] = 0.5;
        u.0[5] = 0.1 / (2.0 * 0.5);
        let f = p.residual(&u, &Vector3::new(0.01, 0.02, 0.03), 10.0).unwrap();
        assert_relative_eq!(f[5], 0.09 + 0.25 - 1.0, epsilon = 1e-15);
        assert_relative_eq!(f[4], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn residual_is_scaled_gradient_of_lagrangian() {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude);
        let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
        let omega = Vector3::new(2.4, 2.9, -0.4) * DEG;
        let mut u = SolverVector::seed(&cfg);
        for k in 0..u.0.len() {
            u.0[k] += 0.1 * ((k as f64) * 1.3).sin();
        }
        let t = 250.0;
        let f = p.residual(&u, &omega, t).unwrap();
        let dtau = cfg.stage_length();
        let h = 1e-5;
        for k in 0..u.0.len() {
            let mut up = u.clone();
            let mut um = u.clone();
            up.0[k] += h;
            um.0[k] -= h;
            let g = (p.lagrangian(&up, &omega, t).unwrap() - p.lagrangian(&um, &omega, t).unwrap()) / (2.0 * h);
            assert_relative_eq!(g / dtau, f[k], max_relative = 1e-6, epsilon = 1e-7);
        }
    }
}
