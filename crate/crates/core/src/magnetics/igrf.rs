use std::path::Path;
use std::sync::Arc;

use nalgebra::{Rotation3, Vector3};

use super::earth::{decimal_year_to_jd, gmst};
use super::FieldModel;
use crate::error::{Error, Result};
use crate::orbit::OrbitElements;

/// IGRF reference radius, m.
pub const IGRF_REFERENCE_RADIUS: f64 = 6_371_200.0;

const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;
/// Secular variation is valid for five years past the last epoch.
const SV_SPAN_YEARS: f64 = 5.0;

static EMBEDDED_IGRF13: &str = include_str!("../../data/igrf13coeffs.txt");

#[inline]
fn idx(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Gauss coefficients of a spherical-harmonic main-field model, nT and nT/yr.
#[derive(Debug, Clone, PartialEq)]
pub struct IgrfCoefficients {
    pub epochs: Vec<f64>,
    pub max_degree: usize,
    /// `g[epoch][idx(n, m)]`
    g: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
    sv_g: Vec<f64>,
    sv_h: Vec<f64>,
}

impl IgrfCoefficients {
    /// The IGRF-13 table shipped with the crate.
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED_IGRF13).expect("embedded IGRF table is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingCoefficients {
                path: path.to_path_buf(),
            });
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parse the published `g/h n m <epochs...> SV` text layout. Lines
    /// starting with `#` and the `c/s` row are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut epochs: Option<Vec<f64>> = None;
        let mut rows: Vec<(usize, char, usize, usize, Vec<f64>)> = Vec::new();

        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("c/s") {
                continue;
            }
            let mut tok = trimmed.split_whitespace();
            let head = tok.next().unwrap_or_default();
            if head == "g/h" {
                let rest: Vec<&str> = tok.collect();
                if rest.len() < 4 || rest[0] != "n" || rest[1] != "m" {
                    return Err(Error::CoefficientParse {
                        line: lineno,
                        msg: "header must read 'g/h n m <epochs...> <sv>'".into(),
                    });
                }
                // the trailing column labels the secular-variation interval
                let years = rest[2..rest.len() - 1]
                    .iter()
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| Error::CoefficientParse {
                            line: lineno,
                            msg: format!("bad epoch '{s}'"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                if years.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::CoefficientParse {
                        line: lineno,
                        msg: "epochs must be strictly increasing".into(),
                    });
                }
                epochs = Some(years);
                continue;
            }
            let kind = match head {
                "g" => 'g',
                "h" => 'h',
                other => {
                    return Err(Error::CoefficientParse {
                        line: lineno,
                        msg: format!("unexpected row tag '{other}'"),
                    })
                }
            };
            let parse_usize = |s: Option<&str>| -> Result<usize> {
                s.and_then(|s| s.parse().ok()).ok_or_else(|| Error::CoefficientParse {
                    line: lineno,
                    msg: "missing or invalid degree/order".into(),
                })
            };
            let n = parse_usize(tok.next())?;
            let m = parse_usize(tok.next())?;
            if n == 0 || m > n || (kind == 'h' && m == 0) {
                return Err(Error::CoefficientParse {
                    line: lineno,
                    msg: format!("invalid (n, m) = ({n}, {m}) for '{kind}'"),
                });
            }
            let values = tok
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::CoefficientParse {
                            line: lineno,
                            msg: format!("bad coefficient '{s}'"),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((lineno, kind, n, m, values));
        }

        let epochs = epochs.ok_or(Error::CoefficientParse {
            line: 0,
            msg: "no 'g/h n m' header found".into(),
        })?;
        let max_degree = rows.iter().map(|r| r.2).max().ok_or(Error::CoefficientParse {
            line: 0,
            msg: "no coefficient rows".into(),
        })?;

        let size = idx(max_degree, max_degree) + 1;
        let mut g = vec![vec![0.0; size]; epochs.len()];
        let mut h = vec![vec![0.0; size]; epochs.len()];
        let mut sv_g = vec![0.0; size];
        let mut sv_h = vec![0.0; size];
        for (lineno, kind, n, m, values) in rows {
            if values.len() != epochs.len() + 1 {
                return Err(Error::CoefficientParse {
                    line: lineno,
                    msg: format!("expected {} values, found {}", epochs.len() + 1, values.len()),
                });
            }
            let k = idx(n, m);
            let (table, sv) = if kind == 'g' {
                (&mut g, &mut sv_g)
            } else {
                (&mut h, &mut sv_h)
            };
            for (e, v) in values[..epochs.len()].iter().enumerate() {
                table[e][k] = *v;
            }
            sv[k] = values[epochs.len()];
        }

        Ok(IgrfCoefficients {
            epochs,
            max_degree,
            g,
            h,
            sv_g,
            sv_h,
        })
    }

    /// Build a table from explicit single-epoch coefficients (tests, synthetic fields).
    pub fn single_epoch(epoch: f64, max_degree: usize, coeffs: &[(usize, usize, f64, f64)]) -> Self {
        let size = idx(max_degree, max_degree) + 1;
        let mut g = vec![0.0; size];
        let mut h = vec![0.0; size];
        for &(n, m, gv, hv) in coeffs {
            g[idx(n, m)] = gv;
            h[idx(n, m)] = hv;
        }
        IgrfCoefficients {
            epochs: vec![epoch],
            max_degree,
            g: vec![g],
            h: vec![h],
            sv_g: vec![0.0; size],
            sv_h: vec![0.0; size],
        }
    }

    pub fn validity(&self) -> (f64, f64) {
        (self.epochs[0], self.epochs[self.epochs.len() - 1] + SV_SPAN_YEARS)
    }

    /// Coefficients at `date`: linear between epochs, secular variation past the last one.
    pub fn coefficients_at(&self, date: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (start, end) = self.validity();
        if !(date >= start && date <= end) {
            return Err(Error::DateOutOfRange { date, start, end });
        }
        let last = self.epochs.len() - 1;
        if date >= self.epochs[last] {
            let dt = date - self.epochs[last];
            let g = self.g[last].iter().zip(&self.sv_g).map(|(c, s)| c + s * dt).collect();
            let h = self.h[last].iter().zip(&self.sv_h).map(|(c, s)| c + s * dt).collect();
            return Ok((g, h));
        }
        let k = self.epochs.partition_point(|&e| e <= date) - 1;
        let w = (date - self.epochs[k]) / (self.epochs[k + 1] - self.epochs[k]);
        let lerp = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect();
        Ok((lerp(&self.g[k], &self.g[k + 1]), lerp(&self.h[k], &self.h[k + 1])))
    }

    /// Field at geocentric spherical coordinates as `(B_r, B_θ, B_φ)`, T.
    ///
    /// `colatitude` and `longitude` in radians, `radius` in metres.
    pub fn field_spherical(
        &self,
        radius: f64,
        colatitude: f64,
        longitude: f64,
        date: f64,
        degree: usize,
    ) -> Result<Vector3<f64>> {
        if degree > self.max_degree {
            return Err(Error::DegreeOutOfRange {
                requested: degree,
                available: self.max_degree,
            });
        }
        let (g, h) = self.coefficients_at(date)?;
        Ok(synthesize(&g, &h, degree, radius, colatitude, longitude))
    }
}

/// Schmidt semi-normalized `P_n^m(cos θ)` and `dP_n^m/dθ`, flat-indexed.
fn schmidt_legendre(degree: usize, colatitude: f64) -> (Vec<f64>, Vec<f64>) {
    let size = idx(degree, degree) + 1;
    let (s, c) = colatitude.sin_cos();
    let mut p = vec![0.0; size];
    let mut dp = vec![0.0; size];
    p[0] = 1.0;
    // Gauss-normalized recursion first
    for n in 1..=degree {
        for m in 0..=n {
            let k = idx(n, m);
            if m == n {
                let km = idx(n - 1, n - 1);
                p[k] = s * p[km];
                dp[k] = c * p[km] + s * dp[km];
            } else if n == 1 || m == n - 1 {
                let km = idx(n - 1, m);
                p[k] = c * p[km];
                dp[k] = -s * p[km] + c * dp[km];
            } else {
                let (k1, k2) = (idx(n - 1, m), idx(n - 2, m));
                let nf = n as f64;
                let mf = m as f64;
                let kk = ((nf - 1.0).powi(2) - mf * mf) / ((2.0 * nf - 1.0) * (2.0 * nf - 3.0));
                p[k] = c * p[k1] - kk * p[k2];
                dp[k] = -s * p[k1] + c * dp[k1] - kk * dp[k2];
            }
        }
    }
    // Schmidt factors
    let mut prev_n0 = 1.0;
    for n in 1..=degree {
        let nf = n as f64;
        let mut factor = prev_n0 * (2.0 * nf - 1.0) / nf;
        prev_n0 = factor;
        for m in 0..=n {
            if m > 0 {
                let mf = m as f64;
                let delta = if m == 1 { 2.0 } else { 1.0 };
                factor *= ((nf - mf + 1.0) * delta / (nf + mf)).sqrt();
            }
            let k = idx(n, m);
            p[k] *= factor;
            dp[k] *= factor;
        }
    }
    (p, dp)
}

fn synthesize(g: &[f64], h: &[f64], degree: usize, r: f64, colat: f64, lon: f64) -> Vector3<f64> {
    let (p, dp) = schmidt_legendre(degree, colat);
    let ratio = IGRF_REFERENCE_RADIUS / r;
    let sin_colat = colat.sin();
    let (mut br, mut bt, mut bp) = (0.0, 0.0, 0.0);
    let mut rpow = ratio * ratio;
    for n in 1..=degree {
        rpow *= ratio; // (a/r)^(n+2)
        let nf = n as f64;
        for m in 0..=n {
            let k = idx(n, m);
            let (sm, cm) = (m as f64 * lon).sin_cos();
            let gc = g[k] * cm + h[k] * sm;
            br += (nf + 1.0) * rpow * gc * p[k];
            bt -= rpow * gc * dp[k];
            bp += rpow * m as f64 * (g[k] * sm - h[k] * cm) * p[k];
        }
    }
    // B_φ carries 1/sin θ; the orbit never reaches the poles exactly
    let bp = if sin_colat.abs() > 1e-12 { bp / sin_colat } else { 0.0 };
    Vector3::new(br, bt, bp) * 1e-9
}

/// IGRF evaluated along a Keplerian orbit, with Earth rotation from GMST.
#[derive(Debug, Clone)]
pub struct IgrfModel {
    pub coeffs: Arc<IgrfCoefficients>,
    pub orbit: OrbitElements,
    pub epoch_year: f64,
    pub degree: usize,
}

impl IgrfModel {
    pub fn new(coeffs: Arc<IgrfCoefficients>, orbit: OrbitElements, epoch_year: f64, degree: usize) -> Result<Self> {
        if degree > coeffs.max_degree {
            return Err(Error::DegreeOutOfRange {
                requested: degree,
                available: coeffs.max_degree,
            });
        }
        coeffs.coefficients_at(epoch_year)?;
        Ok(IgrfModel {
            coeffs,
            orbit,
            epoch_year,
            degree,
        })
    }

    /// Field in ECI at an arbitrary ECI position and time.
    pub fn field_at_eci(&self, pos: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        let theta_g = gmst(decimal_year_to_jd(self.epoch_year) + t / 86_400.0);
        let to_ecef = Rotation3::from_axis_angle(&Vector3::z_axis(), -theta_g);
        let p = to_ecef * pos;
        let r = p.norm();
        let colat = (p.z / r).clamp(-1.0, 1.0).acos();
        let lon = p.y.atan2(p.x);
        let date = self.epoch_year + t / SECONDS_PER_YEAR;
        let b = self.coeffs.field_spherical(r, colat, lon, date, self.degree)?;

        let (st, ct) = colat.sin_cos();
        let (sp, cp) = lon.sin_cos();
        let e_r = Vector3::new(st * cp, st * sp, ct);
        let e_t = Vector3::new(ct * cp, ct * sp, -st);
        let e_p = Vector3::new(-sp, cp, 0.0);
        let b_ecef = e_r * b.x + e_t * b.y + e_p * b.z;
        Ok(to_ecef.inverse() * b_ecef)
    }
}

impl FieldModel for IgrfModel {
    fn field_inertial(&self, t: f64) -> Result<Vector3<f64>> {
        let pos = self.orbit.position_eci(t)?;
        self.field_at_eci(&pos, t)
    }

    fn orbit_to_inertial(&self) -> Rotation3<f64> {
        self.orbit.orbit_plane_to_eci()
    }
}
