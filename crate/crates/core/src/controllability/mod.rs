//! Numeric rank conditions for `ω̇ = f₀(ω) + f₁(ω, t) m_x`.
//!
//! `f₀` is the torque-free Euler drift and `f₁ = [0, −B_z/J_y, B_y/J_z]ᵀ`
//! carries the time-varying body-frame field. Brackets are evaluated by
//! central differences; [`g_closed_forms`] gives the hand-derived fields
//! used to check them.

mod fields;
mod rank;

pub use fields::{control_field, drift_field, FieldSource, VectorField};
pub use rank::{
    algorithm1_rank, brute_force_rank, rank_of, rank_sweep, DistributionBasis, RankSample, RankSweepReport,
    DEFAULT_RANK_TOL,
};

use nalgebra::Vector3;

use crate::dynamics::InertiaTensor;
use crate::error::Result;

/// `[ξ, η] = (∂η/∂ω)ξ − (∂ξ/∂ω)η`, Jacobians by central differences with
/// step `1e-6 (1 + |ω|)`.
pub fn lie_bracket(xi: &VectorField, eta: &VectorField, omega: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
    let a = xi.eval(omega, t)?;
    let b = eta.eval(omega, t)?;
    Ok(jacobian_times(eta, omega, t, &a)? - jacobian_times(xi, omega, t, &b)?)
}

fn jacobian_times(field: &VectorField, omega: &Vector3<f64>, t: f64, v: &Vector3<f64>) -> Result<Vector3<f64>> {
    let h = 1e-6 * (1.0 + omega.norm());
    let mut out = Vector3::zeros();
    for k in 0..3 {
        if v[k] == 0.0 {
            continue;
        }
        let mut e = Vector3::zeros();
        e[k] = h;
        let col = (field.eval(&(omega + e), t)? - field.eval(&(omega - e), t)?) / (2.0 * h);
        out += col * v[k];
    }
    Ok(out)
}

/// `⟨ξ, η⟩ = [ξ, η] − ∂ξ/∂t`.
pub fn symmetric_product(xi: &VectorField, eta: &VectorField, omega: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
    Ok(lie_bracket(xi, eta, omega, t)? - xi.time_derivative(omega, t)?)
}

/// Closed-form `f₁, g₁ = ⟨f₁,f₀⟩, g₂ = ⟨g₁,f₀⟩, g₃ = [g₁,f₁]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub f1: Vector3<f64>,
    pub g1: Vector3<f64>,
    pub g2: Vector3<f64>,
    pub g3: Vector3<f64>,
}

/// Evaluate the hand-derived fields for body-frame `B`, `Ḃ`, `B̈`.
pub fn g_closed_forms(
    j: &InertiaTensor,
    b: &Vector3<f64>,
    b_dot: &Vector3<f64>,
    b_ddot: &Vector3<f64>,
    omega: &Vector3<f64>,
) -> ClosedForms {
    let (jx, jy, jz) = (j.jx, j.jy, j.jz);
    let (by, bz) = (b.y, b.z);
    let (dby, dbz) = (b_dot.y, b_dot.z);
    let (ddby, ddbz) = (b_ddot.y, b_ddot.z);
    let (wx, wy, wz) = (omega.x, omega.y, omega.z);

    let f1 = Vector3::new(0.0, -bz / jy, by / jz);
    let g1 = Vector3::new(
        by * wy * (jy - jz) / (jx * jz) - bz * wz * (jy - jz) / (jx * jy),
        dbz / jy - by * wx * (jx - jz) / (jy * jz),
        -dby / jz - bz * wx * (jx - jy) / (jy * jz),
    );
    let g2 = Vector3::new(
        -2.0 / (jx * jy * jz) * (jy - jz) * (jy * dby * wy - jz * dbz * wz),
        -1.0 / (jx * jy * jy * jz)
            * (jy
                * (bz * jx * jx * wx * wx - 2.0 * dby * jx * jx * wx - bz * jx * jz * wx * wx
                    + 2.0 * dby * jx * jz * wx
                    - bz * jx * jz * wz * wz
                    + ddbz * jx * jz
                    + bz * jz * jz * wz * wz)
                - bz * jx.powi(3) * wx * wx
                - bz * jz.powi(3) * wz * wz
                + bz * jx * jx * jz * wx * wx
                + bz * jx * jz * jz * wz * wz),
        1.0 / (jx * jy * jz * jz)
            * (jz
                * (by * jx * jx * wx * wx + 2.0 * dbz * jx * jx * wx
                    - by * jx * jy * wx * wx
                    - 2.0 * dbz * jx * jy * wx
                    - by * jx * jy * wy * wy
                    + ddby * jx * jy
                    + by * jy * jy * wy * wy)
                - by * jx.powi(3) * wx * wx
                - by * jy.powi(3) * wy * wy
                + by * jx * jx * jy * wx * wx
                + by * jx * jy * jy * wy * wy),
    );
    let g3 = Vector3::new(2.0 * by * bz * (jy - jz) / (jx * jy * jz), 0.0, 0.0);
    ClosedForms { f1, g1, g2, g3 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn linear(a: nalgebra::Matrix3<f64>) -> VectorField {
        VectorField::new(move |w, _| Ok(a * w))
    }

    #[test]
    fn bracket_of_linear_fields_is_commutator() {
        let a = nalgebra::Matrix3::new(1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.0, 1.0, -2.0);
        let b = nalgebra::Matrix3::new(0.0, 1.0, 1.0, 2.0, 0.0, -1.0, 1.0, 1.0, 0.0);
        let w = Vector3::new(0.3, -0.2, 0.7);
        let got = lie_bracket(&linear(a), &linear(b), &w, 0.0).unwrap();
        assert_relative_eq!(got, (b * a - a * b) * w, epsilon = 1e-8);
    }

    #[test]
    fn bracket_of_field_with_itself_and_constants() {
        let j = InertiaTensor::asymmetric_reference();
        let f0 = drift_field(j);
        let w = Vector3::new(0.03, -0.01, 0.02);
        assert_eq!(lie_bracket(&f0, &f0, &w, 0.0).unwrap(), Vector3::zeros());
        let c1 = VectorField::new(|_, _| Ok(Vector3::new(1.0, 2.0, 3.0)));
        let c2 = VectorField::new(|_, _| Ok(Vector3::new(-1.0, 0.0, 5.0)));
        assert_eq!(lie_bracket(&c1, &c2, &w, 0.0).unwrap(), Vector3::zeros());
    }

    #[test]
    fn time_invariant_symmetric_product_is_bracket() {
        let j = InertiaTensor::asymmetric_reference();
        let f0 = drift_field(j);
        let c =
            VectorField::new(|_, _| Ok(Vector3::new(0.0, 1.0, -1.0))).with_time_derivative(|_, _| Ok(Vector3::zeros()));
        let w = Vector3::new(0.03, -0.01, 0.02);
        assert_eq!(
            symmetric_product(&c, &f0, &w, 5.0).unwrap(),
            lie_bracket(&c, &f0, &w, 5.0).unwrap()
        );
    }

    #[test]
    fn g3_examples() {
        let j = InertiaTensor::asymmetric_reference();
        let b = Vector3::new(0.0, 2e-5, 3e-5);
        let z = Vector3::zeros();
        let cf = g_closed_forms(&j, &b, &z, &z, &z);
        assert_relative_eq!(cf.g3.x, -5e-7, max_relative = 1e-12);
        let sym = InertiaTensor::new(0.02, 0.03, 0.03).unwrap();
        let w = Vector3::new(0.1, 0.2, -0.3);
        let cf = g_closed_forms(&sym, &b, &Vector3::new(1e-8, 2e-8, 3e-8), &z, &w);
        assert_eq!(cf.g3.x, 0.0);
        assert_eq!(cf.g1.x, 0.0);
        let cf = g_closed_forms(&j, &Vector3::new(1e-5, 0.0, 3e-5), &z, &z, &w);
        assert_eq!(cf.g3, Vector3::zeros());
    }
}
