//! Two-body Keplerian orbit propagation.
//!
//! Time `t` is seconds since the orbit epoch. Besides the usual ECI position
//! this module defines the *orbit-plane frame* in which the on-board dipole
//! model is expressed: x toward the ascending node, z along the orbit angular
//! momentum, y = z × x. For an unperturbed orbit that frame is inertially
//! fixed, and the satellite sits at argument of latitude η measured from x.

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::DEG;

/// Earth gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986_004_418e14;
/// Earth equatorial radius, m.
pub const EARTH_RADIUS: f64 = 6_378_137.0;

const KEPLER_TOL: f64 = 1e-12;
const KEPLER_MAX_ITER: usize = 50;

/// Classical orbital elements. Angles in degrees, semi-major axis in km, as
/// they appear in element sets; converted to SI on use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitElements {
    pub semi_major_axis_km: f64,
    pub eccentricity: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
}

/// Scalar orbit state at one instant, with the rates the field models need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitStateScalar {
    /// True anomaly θ, rad.
    pub true_anomaly: f64,
    /// Geocentric distance r, m.
    pub radius: f64,
    /// Argument of latitude η = θ + ω_e, rad.
    pub arg_latitude: f64,
    /// dr/dt, m/s.
    pub radius_rate: f64,
    /// d²r/dt², m/s².
    pub radius_accel: f64,
    /// dθ/dt = dη/dt, rad/s.
    pub anomaly_rate: f64,
    /// d²θ/dt², rad/s².
    pub anomaly_accel: f64,
}

impl OrbitElements {
    /// Sun-synchronous reference orbit (ESA Aeolus elements).
    pub fn aeolus() -> Self {
        OrbitElements {
            semi_major_axis_km: 6691.6,
            eccentricity: 0.000_464_40,
            inclination_deg: 96.700,
            raan_deg: 100.90,
            arg_perigee_deg: 119.70,
            mean_anomaly_deg: 240.49,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.eccentricity;
        if !(0.0..1.0).contains(&e) {
            return Err(Error::InvalidOrbit(format!("eccentricity {e} outside [0, 1)")));
        }
        if !(self.semi_major_axis() > EARTH_RADIUS) {
            return Err(Error::InvalidOrbit(format!(
                "semi-major axis {} km is not above the Earth radius",
                self.semi_major_axis_km
            )));
        }
        let angles = [
            self.inclination_deg,
            self.raan_deg,
            self.arg_perigee_deg,
            self.mean_anomaly_deg,
        ];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidOrbit("non-finite angle".into()));
        }
        Ok(())
    }

    pub fn semi_major_axis(&self) -> f64 {
        self.semi_major_axis_km * 1e3
    }

    pub fn inclination(&self) -> f64 {
        self.inclination_deg * DEG
    }

    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.semi_major_axis().powi(3)).sqrt()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.mean_motion()
    }

    fn semi_latus_rectum(&self) -> f64 {
        self.semi_major_axis() * (1.0 - self.eccentricity * self.eccentricity)
    }

    pub fn state_at(&self, t: f64) -> Result<OrbitStateScalar> {
        let e = self.eccentricity;
        let m = wrap_pi(self.mean_anomaly_deg * DEG + self.mean_motion() * t);
        let ecc_anom = solve_kepler(m, e)?;
        let theta = true_anomaly(ecc_anom, e);

        let p = self.semi_latus_rectum();
        let h = (MU_EARTH * p).sqrt();
        let r = p / (1.0 + e * theta.cos());
        let theta_dot = h / (r * r);
        let r_dot = MU_EARTH / h * e * theta.sin();
        let r_ddot = MU_EARTH / h * e * theta.cos() * theta_dot;
        let theta_ddot = -2.0 * h * r_dot / (r * r * r);

        Ok(OrbitStateScalar {
            true_anomaly: theta,
            radius: r,
            arg_latitude: theta + self.arg_perigee_deg * DEG,
            radius_rate: r_dot,
            radius_accel: r_ddot,
            anomaly_rate: theta_dot,
            anomaly_accel: theta_ddot,
        })
    }

    /// Rotation taking orbit-plane-frame components to ECI components.
    pub fn orbit_plane_to_eci(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::z_axis(), self.raan_deg * DEG)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), self.inclination())
    }

    /// ECI position, m.
    pub fn position_eci(&self, t: f64) -> Result<Vector3<f64>> {
        let s = self.state_at(t)?;
        let (su, cu) = s.arg_latitude.sin_cos();
        Ok(self.orbit_plane_to_eci() * Vector3::new(s.radius * cu, s.radius * su, 0.0))
    }
}

/// Wrap an angle into [−π, π).
pub fn wrap_pi(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    (a + PI).rem_euclid(TAU) - PI
}

/// Newton iteration on `E − e sin E = M`.
pub fn solve_kepler(mean_anomaly: f64, e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::InvalidOrbit(format!("eccentricity {e} outside [0, 1)")));
    }
    if e == 0.0 {
        return Ok(mean_anomaly);
    }
    let mut ecc = if e < 0.8 {
        mean_anomaly
    } else {
        std::f64::consts::PI.copysign(mean_anomaly)
    };
    for _ in 0..KEPLER_MAX_ITER {
        let residual = ecc - e * ecc.sin() - mean_anomaly;
        if residual.abs() < KEPLER_TOL {
            return Ok(ecc);
        }
        ecc -= residual / (1.0 - e * ecc.cos());
    }
    let residual = ecc - e * ecc.sin() - mean_anomaly;
    if residual.abs() < KEPLER_TOL {
        Ok(ecc)
    } else {
        Err(Error::KeplerNonConvergence {
            mean_anomaly,
            eccentricity: e,
        })
    }
}

/// Half-angle tangent formula.
pub fn true_anomaly(ecc_anomaly: f64, e: f64) -> f64 {
    let (s, c) = (0.5 * ecc_anomaly).sin_cos();
    2.0 * ((1.0 + e).sqrt() * s).atan2((1.0 - e).sqrt() * c)
}
