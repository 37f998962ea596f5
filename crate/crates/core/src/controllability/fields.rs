use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::dynamics::InertiaTensor;
use crate::error::Result;
use crate::magnetics::FieldModel;

type Eval = Arc<dyn Fn(&Vector3<f64>, f64) -> Result<Vector3<f64>> + Send + Sync>;

/// Step for finite-difference time derivatives, s.
const TIME_STEP: f64 = 1e-4;

/// A time-varying vector field on ω-space.
#[derive(Clone)]
pub struct VectorField {
    eval: Eval,
    dt: Option<Eval>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("analytic_time_derivative", &self.dt.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&Vector3<f64>, f64) -> Result<Vector3<f64>> + Send + Sync + 'static,
    {
        VectorField {
            eval: Arc::new(f),
            dt: None,
        }
    }

    pub fn with_time_derivative<F>(mut self, f: F) -> Self
    where
        F: Fn(&Vector3<f64>, f64) -> Result<Vector3<f64>> + Send + Sync + 'static,
    {
        self.dt = Some(Arc::new(f));
        self
    }

    pub fn has_analytic_time_derivative(&self) -> bool {
        self.dt.is_some()
    }

    pub fn eval(&self, omega: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        (self.eval)(omega, t)
    }

    /// `∂ξ/∂t`, analytic when provided, otherwise a central difference.
    pub fn time_derivative(&self, omega: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        match &self.dt {
            Some(dt) => dt(omega, t),
            None => Ok((self.eval(omega, t + TIME_STEP)? - self.eval(omega, t - TIME_STEP)?) / (2.0 * TIME_STEP)),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let inner = self.clone();
        let scaled = VectorField::new(move |w, t| Ok(inner.eval(w, t)? * k));
        match &self.dt {
            Some(dt) => {
                let dt = dt.clone();
                scaled.with_time_derivative(move |w, t| Ok(dt(w, t)? * k))
            }
            None => scaled,
        }
    }
}

/// Body-frame field history feeding `f₁`.
#[derive(Clone)]
pub enum FieldSource {
    /// A fixed field, `Ḃ = B̈ = 0`.
    Constant(Vector3<f64>),
    /// A field model with the body aligned to the orbit-plane frame.
    Model(Arc<dyn FieldModel>),
}

impl fmt::Debug for FieldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSource::Constant(b) => f.debug_tuple("Constant").field(b).finish(),
            FieldSource::Model(_) => f.write_str("Model(..)"),
        }
    }
}

impl FieldSource {
    /// `[B, Ḃ, B̈]` at `t`.
    pub fn derivatives(&self, t: f64) -> Result<[Vector3<f64>; 3]> {
        match self {
            FieldSource::Constant(b) => Ok([*b, Vector3::zeros(), Vector3::zeros()]),
            FieldSource::Model(m) => m.orbital_derivatives(t),
        }
    }

    pub fn field(&self, t: f64) -> Result<Vector3<f64>> {
        match self {
            FieldSource::Constant(b) => Ok(*b),
            FieldSource::Model(m) => m.field_orbital(t),
        }
    }
}

/// Torque-free Euler drift `f₀`.
pub fn drift_field(j: InertiaTensor) -> VectorField {
    VectorField::new(move |w, _| {
        Ok(Vector3::new(
            (j.jy - j.jz) / j.jx * w.y * w.z,
            (j.jz - j.jx) / j.jy * w.z * w.x,
            (j.jx - j.jy) / j.jz * w.x * w.y,
        ))
    })
    .with_time_derivative(|_, _| Ok(Vector3::zeros()))
}

/// Input field `f₁ = [0, −B_z/J_y, B_y/J_z]ᵀ` with its analytic `∂f₁/∂t`.
pub fn control_field(j: InertiaTensor, source: FieldSource) -> VectorField {
    let dt_source = source.clone();
    VectorField::new(move |_, t| {
        let b = source.field(t)?;
        Ok(Vector3::new(0.0, -b.z / j.jy, b.y / j.jz))
    })
    .with_time_derivative(move |_, t| {
        let [_, b_dot, _] = dt_source.derivatives(t)?;
        Ok(Vector3::new(0.0, -b_dot.z / j.jy, b_dot.y / j.jz))
    })
}
