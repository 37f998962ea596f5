use nalgebra::{Rotation3, Vector3};

use super::{FieldModel, Frame, GeomagneticSample};
use crate::error::Result;
use crate::orbit::OrbitElements;

/// Earth dipole strength, T·m³ (8.1e25 gauss·cm³).
pub const EARTH_DIPOLE_MOMENT: f64 = 8.1e15;

/// Axial dipole field in the orbit-plane frame:
///
/// ```text
/// B₀ = D_m [ (3/2) sin i sin 2η,  −(3/2) sin i (cos 2η − 1/3),  −cos i ],   D_m = −M_e / r³
/// ```
///
/// with η the argument of latitude. This is the exact field of an Earth
/// dipole anti-aligned with the spin axis, resolved on the axes
/// (ascending node, in-plane normal, orbit normal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleModel {
    pub orbit: OrbitElements,
    pub moment: f64,
}

impl DipoleModel {
    pub fn new(orbit: OrbitElements) -> Self {
        DipoleModel {
            orbit,
            moment: EARTH_DIPOLE_MOMENT,
        }
    }

    /// `[B, Ḃ, B̈]` in the orbit-plane frame, all analytic.
    pub fn derivatives(&self, t: f64) -> Result<[Vector3<f64>; 3]> {
        let s = self.orbit.state_at(t)?;
        let si = self.orbit.inclination().sin();
        let ci = self.orbit.inclination().cos();
        let (s2, c2) = (2.0 * s.arg_latitude).sin_cos();

        // shape vector and its η-derivatives
        let v = Vector3::new(1.5 * si * s2, -1.5 * si * (c2 - 1.0 / 3.0), -ci);
        let v1 = Vector3::new(3.0 * si * c2, 3.0 * si * s2, 0.0);
        let v2 = Vector3::new(-6.0 * si * s2, 6.0 * si * c2, 0.0);

        let r = s.radius;
        let me = self.moment;
        let d = -me / r.powi(3);
        let d1 = 3.0 * me / r.powi(4) * s.radius_rate;
        let d2 = -12.0 * me / r.powi(5) * s.radius_rate.powi(2) + 3.0 * me / r.powi(4) * s.radius_accel;

        let eta1 = s.anomaly_rate;
        let eta2 = s.anomaly_accel;

        let b = v * d;
        let b1 = v * d1 + v1 * (d * eta1);
        let b2 = v * d2 + v1 * (2.0 * d1 * eta1) + v2 * (d * eta1 * eta1) + v1 * (d * eta2);
        Ok([b, b1, b2])
    }

    pub fn sample_orbital(&self, t: f64) -> Result<GeomagneticSample> {
        let [b, b_dot, _] = self.derivatives(t)?;
        Ok(GeomagneticSample {
            b,
            b_dot,
            frame: Frame::Orbital,
            t,
        })
    }
}

impl FieldModel for DipoleModel {
    fn field_inertial(&self, t: f64) -> Result<Vector3<f64>> {
        Ok(self.orbit_to_inertial() * self.field_orbital(t)?)
    }

    fn orbit_to_inertial(&self) -> Rotation3<f64> {
        self.orbit.orbit_plane_to_eci()
    }

    fn field_orbital(&self, t: f64) -> Result<Vector3<f64>> {
        Ok(self.derivatives(t)?[0])
    }

    fn orbital_derivatives(&self, t: f64) -> Result<[Vector3<f64>; 3]> {
        self.derivatives(t)
    }
}

/// Orbit-frame dipole sample at `t` with the analytic derivative.
pub fn dipole_field_orbital(orbit: &OrbitElements, t: f64) -> Result<GeomagneticSample> {
    DipoleModel::new(*orbit).sample_orbital(t)
}
