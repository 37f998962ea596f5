use nalgebra::{DMatrix, Vector3};

use super::fields::{control_field, drift_field, FieldSource, VectorField};
use super::{lie_bracket, symmetric_product};
use crate::dynamics::InertiaTensor;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Relative singular-value cutoff.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// `Δ₂ = span{f₁, g₁, g₂, g₃}` evaluated at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionBasis {
    /// `f₁, g₁, g₂, g₃`.
    pub fields: [Vector3<f64>; 4],
    pub omega: Vector3<f64>,
    pub t: f64,
    /// Descending.
    pub singular_values: [f64; 3],
    pub rank: usize,
}

/// Rank and descending singular values of the matrix with the given columns.
pub fn rank_of(columns: &[Vector3<f64>], tol: f64) -> (usize, [f64; 3]) {
    let mut sigma = [0.0; 3];
    if columns.is_empty() {
        return (0, sigma);
    }
    let m = DMatrix::from_fn(3, columns.len(), |i, k| columns[k][i]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    for (s, v) in sigma.iter_mut().zip(&sv) {
        *s = *v;
    }
    let cutoff = tol * sigma[0];
    let rank = if sigma[0] == 0.0 {
        0
    } else {
        sigma.iter().filter(|&&s| s > cutoff).count()
    };
    (rank, sigma)
}

fn numeric_field<F>(f: F) -> VectorField
where
    F: Fn(&Vector3<f64>, f64) -> Result<Vector3<f64>> + Send + Sync + 'static,
{
    VectorField::new(f)
}

/// `f₁`, `g₁ = ⟨f₁,f₀⟩`, `g₂ = ⟨g₁,f₀⟩`, `g₃ = [g₁,f₁]` at `(ω, t)`, all numeric.
pub fn algorithm1_rank(
    j: InertiaTensor,
    source: &FieldSource,
    omega: &Vector3<f64>,
    t: f64,
    tol: f64,
) -> Result<DistributionBasis> {
    if source.field(t)?.norm() == 0.0 {
        return Err(Error::DegenerateField { t });
    }
    let f0 = drift_field(j);
    let f1 = control_field(j, source.clone());
    let g1 = {
        let (f0, f1) = (f0.clone(), f1.clone());
        numeric_field(move |w, t| symmetric_product(&f1, &f0, w, t))
    };
    let fields = [
        f1.eval(omega, t)?,
        g1.eval(omega, t)?,
        symmetric_product(&g1, &f0, omega, t)?,
        lie_bracket(&g1, &f1, omega, t)?,
    ];
    let (rank, singular_values) = rank_of(&fields, tol);
    Ok(DistributionBasis {
        fields,
        omega: *omega,
        t,
        singular_values,
        rank,
    })
}

/// Algorithm 1 without the hand-picked basis: starting from `Δ₀ = {f₁}`,
/// add `⟨ξ,f₀⟩` and `[ξ,f₁]` for every retained `ξ` while the dimension grows.
///
/// Each level nests one more finite difference, so the loop is capped at
/// `max_depth` levels.
pub fn brute_force_rank(
    j: InertiaTensor,
    source: &FieldSource,
    omega: &Vector3<f64>,
    t: f64,
    tol: f64,
    max_depth: usize,
) -> Result<usize> {
    let f0 = drift_field(j);
    let f1 = control_field(j, source.clone());
    let mut basis = vec![f1.clone()];
    let mut values = vec![f1.eval(omega, t)?];
    let mut dim = rank_of(&values, tol).0;
    let mut frontier = basis.clone();
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for xi in &frontier {
            let (a, b, c) = (xi.clone(), f0.clone(), xi.clone());
            let f1c = f1.clone();
            next.push(numeric_field(move |w, t| symmetric_product(&a, &b, w, t)));
            next.push(numeric_field(move |w, t| lie_bracket(&c, &f1c, w, t)));
        }
        let mut candidate = values.clone();
        for field in &next {
            candidate.push(field.eval(omega, t)?);
        }
        let new_dim = rank_of(&candidate, tol).0;
        if new_dim <= dim {
            break;
        }
        dim = new_dim;
        values = candidate;
        basis.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(dim)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSample {
    pub t: f64,
    pub singular_values: [f64; 3],
    pub rank: usize,
    /// `|g₃| / σ₁`.
    pub g3_relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSweepReport {
    pub samples: Vec<RankSample>,
    pub min_rank: usize,
    pub max_rank: usize,
    /// Times where the rank is below 3.
    pub deficient: Vec<f64>,
    /// Smallest `σ₃/σ₁` over the sweep.
    pub min_sigma3_relative: f64,
    /// `g₃` negligible at every sample: the x axis is only reachable
    /// through ω-dependent terms.
    pub g3_vanishes: bool,
}

/// Evaluate [`algorithm1_rank`] at `n_samples` evenly spaced times over `[0, period)`.
pub fn rank_sweep(
    j: InertiaTensor,
    source: &FieldSource,
    period: f64,
    n_samples: usize,
    omega: &Vector3<f64>,
    tol: f64,
    exec: Execution,
) -> Result<RankSweepReport> {
    if n_samples < 2 {
        return Err(Error::Config(format!(
            "rank sweep needs at least 2 samples, got {n_samples}"
        )));
    }
    let samples = exec
        .map_range(n_samples, |k| {
            let t = period * k as f64 / n_samples as f64;
            let basis = algorithm1_rank(j, source, omega, t, tol)?;
            let s = basis.singular_values;
            Ok(RankSample {
                t,
                singular_values: s,
                rank: basis.rank,
                g3_relative: if s[0] > 0.0 { basis.fields[3].norm() / s[0] } else { 0.0 },
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let min_rank = samples.iter().map(|s| s.rank).min().unwrap_or(0);
    let max_rank = samples.iter().map(|s| s.rank).max().unwrap_or(0);
    let deficient = samples.iter().filter(|s| s.rank < 3).map(|s| s.t).collect();
    let min_sigma3_relative = samples
        .iter()
        .map(|s| {
            if s.singular_values[0] > 0.0 {
                s.singular_values[2] / s.singular_values[0]
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min);
    let g3_vanishes = samples.iter().all(|s| s.g3_relative <= tol);
    Ok(RankSweepReport {
        samples,
        min_rank,
        max_rank,
        deficient,
        min_sigma3_relative,
        g3_vanishes,
    })
}
