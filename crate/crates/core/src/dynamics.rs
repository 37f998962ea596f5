//! Rigid-body rotational dynamics under a single-axis magnetic torquer.
//!
//! Attitude convention: `q` is the attitude of the body frame relative to the
//! inertial frame, so `v_inertial = q * v_body` and
//! `v_body = q⁻¹ * v_inertial`. Kinematics follow `q̇ = ½ q ⊗ (0, ω)` with ω
//! in body coordinates. Quaternions are stored scalar-first `(w, x, y, z)`.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Principal moments of inertia, kg·m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaTensor {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl InertiaTensor {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Result<Self> {
        let j = InertiaTensor { jx, jy, jz };
        j.validate()?;
        Ok(j)
    }

    /// Moments used in the asymmetric-satellite study.
    pub fn asymmetric_reference() -> Self {
        InertiaTensor {
            jx: 0.020,
            jy: 0.030,
            jz: 0.040,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let InertiaTensor { jx, jy, jz } = *self;
        if !(jx > 0.0 && jy > 0.0 && jz > 0.0) || !(jx.is_finite() && jy.is_finite() && jz.is_finite()) {
            return Err(Error::InvalidInertia(format!(
                "moments must be positive and finite, got ({jx}, {jy}, {jz})"
            )));
        }
        if jx + jy < jz || jy + jz < jx || jz + jx < jy {
            return Err(Error::InvalidInertia(format!(
                "({jx}, {jy}, {jz}) violates the rigid-body triangle inequality"
            )));
        }
        Ok(())
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.jx, self.jy, self.jz)
    }

    pub fn apply(&self, w: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.jx * w.x, self.jy * w.y, self.jz * w.z)
    }

    /// True when the two moments orthogonal to the torquer axis coincide.
    pub fn is_axisymmetric_about_x(&self) -> bool {
        self.jy == self.jz
    }
}

/// Angular velocity (body frame, rad/s), attitude, and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub omega: Vector3<f64>,
    pub q: UnitQuaternion<f64>,
    pub t: f64,
}

impl BodyState {
    pub fn new(omega: Vector3<f64>, q: UnitQuaternion<f64>, t: f64) -> Self {
        BodyState { omega, q, t }
    }

    pub fn at_rest(t: f64) -> Self {
        BodyState::new(Vector3::zeros(), UnitQuaternion::identity(), t)
    }

    pub fn inertial_to_body(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.q.inverse_transform_vector(v)
    }

    pub fn body_to_inertial(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.q.transform_vector(v)
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().all(|x| x.is_finite()) && self.q.coords.iter().all(|x| x.is_finite())
    }
}

/// Magnetic dipole moment of the x-axis torquer, A·m².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DipoleMoment(pub f64);

/// Control torque in the body frame, N·m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torque(pub Vector3<f64>);

impl Torque {
    pub fn zero() -> Self {
        Torque(Vector3::zeros())
    }
}

/// `T = m × B` for `m = (m_x, 0, 0)`, i.e. `(0, −B_z m_x, B_y m_x)`.
pub fn magnetic_torque(m: DipoleMoment, b_body: &Vector3<f64>) -> Torque {
    Torque(Vector3::new(0.0, -b_body.z * m.0, b_body.y * m.0))
}

/// Euler's equations `J ω̇ = −ω × Jω + T` for a diagonal inertia.
pub fn euler_rhs(omega: &Vector3<f64>, j: &InertiaTensor, torque: &Torque) -> Vector3<f64> {
    let InertiaTensor { jx, jy, jz } = *j;
    let (wx, wy, wz) = (omega.x, omega.y, omega.z);
    let t = torque.0;
    Vector3::new(
        ((jy - jz) * wy * wz + t.x) / jx,
        ((jz - jx) * wz * wx + t.y) / jy,
        ((jx - jy) * wx * wy + t.z) / jz,
    )
}

/// `q̇ = ½ q ⊗ (0, ω)`.
pub fn kinematics_rhs(q: &Quaternion<f64>, omega: &Vector3<f64>) -> Quaternion<f64> {
    let w = Quaternion::new(0.0, omega.x, omega.y, omega.z);
    (q * w) * 0.5
}

/// Rotational kinetic energy `½ ωᵀJω`, J.
pub fn kinetic_energy(omega: &Vector3<f64>, j: &InertiaTensor) -> f64 {
    0.5 * omega.dot(&j.apply(omega))
}

/// Angular momentum `Jω` rotated into the inertial frame, kg·m²/s.
pub fn angular_momentum_inertial(state: &BodyState, j: &InertiaTensor) -> Vector3<f64> {
    state.body_to_inertial(&j.apply(&state.omega))
}

/// One classical RK4 step of the coupled (ω, q) system.
///
/// `field_inertial(t)` is re-evaluated at every stage time and rotated into
/// the body frame with that stage's attitude. The dipole is held constant
/// over the step and `q` is renormalized at the end.
pub fn rk4_step<F>(
    state: &BodyState,
    j: &InertiaTensor,
    control: DipoleMoment,
    field_inertial: F,
    h: f64,
) -> Result<BodyState>
where
    F: Fn(f64) -> Vector3<f64>,
{
    let deriv = |t: f64, w: &Vector3<f64>, q: &Quaternion<f64>| {
        let qn = UnitQuaternion::new_normalize(*q);
        let b_body = qn.inverse_transform_vector(&field_inertial(t));
        let torque = magnetic_torque(control, &b_body);
        (euler_rhs(w, j, &torque), kinematics_rhs(q, w))
    };

    let t0 = state.t;
    let w0 = state.omega;
    let q0 = *state.q.quaternion();

    let (k1w, k1q) = deriv(t0, &w0, &q0);
    let (k2w, k2q) = deriv(t0 + 0.5 * h, &(w0 + k1w * (0.5 * h)), &(q0 + k1q * (0.5 * h)));
    let (k3w, k3q) = deriv(t0 + 0.5 * h, &(w0 + k2w * (0.5 * h)), &(q0 + k2q * (0.5 * h)));
    let (k4w, k4q) = deriv(t0 + h, &(w0 + k3w * h), &(q0 + k3q * h));

    let omega = w0 + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (h / 6.0);
    let q = q0 + (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (h / 6.0);

    let next = BodyState::new(omega, UnitQuaternion::new_normalize(q), t0 + h);
    if !next.is_finite() || !q.norm().is_finite() {
        return Err(Error::NonFiniteState { t: t0 + h });
    }
    Ok(next)
}
