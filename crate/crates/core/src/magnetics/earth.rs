use std::f64::consts::TAU;

/// Earth sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_855_3e-5;

/// Julian date of a decimal year, counting 365.25-day years from J2000's
/// calendar year start (2000-01-01 00:00 = JD 2451544.5).
pub fn decimal_year_to_jd(year: f64) -> f64 {
    2_451_544.5 + (year - 2000.0) * 365.25
}

/// Greenwich mean sidereal time (IAU 1982), rad in [0, 2π).
pub fn gmst(jd: f64) -> f64 {
    let t = (jd - 2_451_545.0) / 36_525.0;
    let seconds = 67_310.548_41 + (876_600.0 * 3600.0 + 8_640_184.812_866) * t + 0.093_104 * t * t - 6.2e-6 * t * t * t;
    (seconds * TAU / 86_400.0).rem_euclid(TAU)
}
