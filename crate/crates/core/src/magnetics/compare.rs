use nalgebra::Vector3;

use super::{DipoleModel, FieldModel, IgrfModel};
use crate::error::Result;
use crate::exec::Execution;

/// One time sample of both field models, orbit-plane frame, T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldComparisonRow {
    pub t: f64,
    pub dipole: Vector3<f64>,
    pub igrf: Vector3<f64>,
}

/// Sample the dipole and IGRF models on the same trajectory.
pub fn compare_models(
    dipole: &DipoleModel,
    igrf: &IgrfModel,
    duration: f64,
    step: f64,
    exec: Execution,
) -> Result<Vec<FieldComparisonRow>> {
    let n = (duration / step).floor() as usize;
    exec.map_range(n, |k| {
        let t = k as f64 * step;
        Ok(FieldComparisonRow {
            t,
            dipole: dipole.field_orbital(t)?,
            igrf: igrf.field_orbital(t)?,
        })
    })
    .into_iter()
    .collect()
}

/// Period of the strongest non-DC harmonic of a uniformly sampled series.
///
/// Returns `None` for a constant (or too short) signal.
pub fn dominant_period(series: &[f64], dt: f64) -> Option<f64> {
    let n = series.len();
    if n < 4 {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let power = |k: usize| {
        let w = std::f64::consts::TAU * k as f64 / n as f64;
        let (re, im) = series.iter().enumerate().fold((0.0, 0.0), |(re, im), (i, x)| {
            let (s, c) = (w * i as f64).sin_cos();
            (re + (x - mean) * c, im - (x - mean) * s)
        });
        re * re + im * im
    };
    let spectrum: Vec<f64> = (0..=n / 2).map(|k| if k == 0 { 0.0 } else { power(k) }).collect();
    let (k, &peak) = spectrum.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let total: f64 = series.iter().map(|x| (x - mean).powi(2)).sum();
    if k == 0 || peak <= 1e-12 * total.max(f64::MIN_POSITIVE) * n as f64 {
        return None;
    }
    Some(n as f64 * dt / k as f64)
}

/// Fraction of samples where two series have the same sign.
pub fn sign_agreement(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let agree = a.iter().zip(b).filter(|(x, y)| x.signum() == y.signum()).count();
    agree as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_period_of_pure_tones() {
        let dt = 10.0;
        let n = 600;
        let s: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * 3.0 * i as f64 / n as f64).sin() + 0.2)
            .collect();
        let p = dominant_period(&s, dt).unwrap();
        assert!((p - n as f64 * dt / 3.0).abs() < 1e-9);
        assert!(dominant_period(&[1.0; 50], 1.0).is_none());
    }

    #[test]
    fn sign_agreement_counts() {
        assert_eq!(sign_agreement(&[1.0, -1.0, 2.0, 3.0], &[2.0, 1.0, 5.0, -1.0]), 0.5);
    }
}
