//! Geomagnetic field models and frame handling.
//!
//! Two models implement [`FieldModel`]: [`DipoleModel`], the closed-form
//! axial dipole expressed in the orbit-plane frame (cheap, analytic
//! derivatives, used inside the controllers), and [`IgrfModel`], the
//! spherical-harmonic reference field used as simulation truth.

mod compare;
mod dipole;
mod earth;
mod igrf;

pub use compare::{compare_models, dominant_period, sign_agreement, FieldComparisonRow};
pub use dipole::{dipole_field_orbital, DipoleModel, EARTH_DIPOLE_MOMENT};
pub use earth::{decimal_year_to_jd, gmst, EARTH_ROTATION_RATE};
pub use igrf::{IgrfCoefficients, IgrfModel, IGRF_REFERENCE_RADIUS};

use nalgebra::{Rotation3, Vector3};

use crate::dynamics::BodyState;
use crate::error::{Error, Result};

/// Frame in which a field sample is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Orbit-plane frame: x to the ascending node, z along orbit normal.
    Orbital,
    Inertial,
    Body,
}

/// A field vector and its time derivative, T and T/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomagneticSample {
    pub b: Vector3<f64>,
    pub b_dot: Vector3<f64>,
    pub frame: Frame,
    pub t: f64,
}

impl GeomagneticSample {
    pub fn require(&self, expected: Frame) -> Result<&Self> {
        if self.frame == expected {
            Ok(self)
        } else {
            Err(Error::FrameMismatch {
                expected,
                found: self.frame,
            })
        }
    }
}

/// A time-parameterized geomagnetic field along a fixed orbit.
pub trait FieldModel: Send + Sync {
    /// Field in ECI at `t` seconds past epoch, T.
    fn field_inertial(&self, t: f64) -> Result<Vector3<f64>>;

    /// Rotation from the orbit-plane frame to ECI.
    fn orbit_to_inertial(&self) -> Rotation3<f64>;

    /// Field in the orbit-plane frame, T.
    fn field_orbital(&self, t: f64) -> Result<Vector3<f64>> {
        Ok(self.orbit_to_inertial().inverse() * self.field_inertial(t)?)
    }

    /// `[B, Ḃ, B̈]` in the orbit-plane frame. The default is a central
    /// difference with a 1 s step, which is far below the orbital time
    /// scale.
    fn orbital_derivatives(&self, t: f64) -> Result<[Vector3<f64>; 3]> {
        const H: f64 = 1.0;
        let b = self.field_orbital(t)?;
        let bp = self.field_orbital(t + H)?;
        let bm = self.field_orbital(t - H)?;
        Ok([b, (bp - bm) / (2.0 * H), (bp - b * 2.0 + bm) / (H * H)])
    }
}

/// Resolve an orbital- or inertial-frame sample in the body frame.
///
/// `orbit_to_inertial` is the constant rotation of the orbit-plane frame. The
/// derivative picks up the transport term of the rotating body frame:
/// `Ḃ_body = R_bi Ḃ_inertial − ω × B_body`.
pub fn field_in_body(
    sample: &GeomagneticSample,
    state: &BodyState,
    orbit_to_inertial: &Rotation3<f64>,
) -> Result<GeomagneticSample> {
    let (b_i, b_dot_i) = match sample.frame {
        Frame::Orbital => (orbit_to_inertial * sample.b, orbit_to_inertial * sample.b_dot),
        Frame::Inertial => (sample.b, sample.b_dot),
        Frame::Body => {
            return Err(Error::FrameMismatch {
                expected: Frame::Inertial,
                found: Frame::Body,
            })
        }
    };
    let b = state.inertial_to_body(&b_i);
    let b_dot = state.inertial_to_body(&b_dot_i) - state.omega.cross(&b);
    Ok(GeomagneticSample {
        b,
        b_dot,
        frame: Frame::Body,
        t: sample.t,
    })
}
