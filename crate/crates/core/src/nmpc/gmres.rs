use nalgebra::{DMatrix, DVector};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// Final `‖b − Ax‖` as tracked by the Givens recurrence.
    pub residual_norm: f64,
}

/// Restart-free GMRES on `A x = b` with at most `k_max` Arnoldi steps.
///
/// `apply` evaluates `A v`. Stops once `‖b − Ax‖ ≤ tol·‖b‖` or the Krylov
/// space is exhausted.
pub fn gmres<F>(mut apply: F, b: &DVector<f64>, x0: &DVector<f64>, k_max: usize, tol: f64) -> Result<GmresOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = b.len();
    let r0 = b - apply(x0)?;
    let beta = r0.norm();
    let target = tol * b.norm().max(f64::MIN_POSITIVE);
    if beta <= target || !beta.is_finite() {
        return Ok(GmresOutcome {
            x: x0.clone(),
            iterations: 0,
            residual_norm: beta,
        });
    }
    let k_max = k_max.min(n).max(1);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k_max + 1);
    basis.push(r0 / beta);
    let mut h = DMatrix::<f64>::zeros(k_max + 1, k_max);
    let mut cs = vec![0.0; k_max];
    let mut sn = vec![0.0; k_max];
    let mut g = DVector::<f64>::zeros(k_max + 1);
    g[0] = beta;
    let mut k = 0;
    let mut residual = beta;
    while k < k_max {
        let mut w = apply(&basis[k])?;
        for (i, v) in basis.iter().enumerate() {
            h[(i, k)] = w.dot(v);
            w.axpy(-h[(i, k)], v, 1.0);
        }
        let h_next = w.norm();
        h[(k + 1, k)] = h_next;
        for i in 0..k {
            let (a, c) = (h[(i, k)], h[(i + 1, k)]);
            h[(i, k)] = cs[i] * a + sn[i] * c;
            h[(i + 1, k)] = -sn[i] * a + cs[i] * c;
        }
        let (a, c) = (h[(k, k)], h[(k + 1, k)]);
        let rho = a.hypot(c);
        cs[k] = if rho == 0.0 { 1.0 } else { a / rho };
        sn[k] = if rho == 0.0 { 0.0 } else { c / rho };
        h[(k, k)] = rho;
        h[(k + 1, k)] = 0.0;
        g[k + 1] = -sn[k] * g[k];
        g[k] *= cs[k];
        residual = g[k + 1].abs();
        k += 1;
        if residual <= target || h_next <= 1e-14 * beta {
            break;
        }
        basis.push(w / h_next);
    }
    // back substitution on the k×k triangle
    let mut y = DVector::<f64>::zeros(k);
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|j| h[(i, j)] * y[j]).sum();
        y[i] = if h[(i, i)] == 0.0 { 0.0 } else { (g[i] - s) / h[(i, i)] };
    }
    let mut x = x0.clone();
    for (i, v) in basis.iter().take(k).enumerate() {
        x.axpy(y[i], v, 1.0);
    }
    Ok(GmresOutcome {
        x,
        iterations: k,
        residual_norm: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd(n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin());
        &a * a.transpose() + DMatrix::identity(n, n) * n as f64
    }

    #[test]
    fn solves_dense_system_in_n_steps() {
        let n = 12;
        let a = spd(n) + DMatrix::from_fn(n, n, |i, j| if i < j { 0.5 } else { 0.0 });
        let x_true = DVector::from_fn(n, |i, _| (i as f64).cos());
        let b = &a * &x_true;
        let out = gmres(|v| Ok(&a * v), &b, &DVector::zeros(n), n, 1e-12).unwrap();
        assert!(out.iterations <= n);
        assert_relative_eq!(out.x, x_true, epsilon = 1e-9);
        assert!((&b - &a * &out.x).norm() <= 1e-10 * b.norm());
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let out = gmres(|v| Ok(v.clone()), &b, &DVector::zeros(3), 3, 1e-12).unwrap();
        assert_eq!(out.iterations, 1);
        assert_relative_eq!(out.x, b, epsilon = 1e-14);
    }

    #[test]
    fn exact_initial_guess_returns_immediately() {
        let a = spd(4);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let b = &a * &x;
        let out = gmres(|v| Ok(&a * v), &b, &x, 4, 1e-10).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn truncated_krylov_reduces_residual() {
        let n = 20;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0 + i as f64
            } else {
                0.01 * ((i + 2 * j) as f64).cos()
            }
        });
        let b = DVector::from_element(n, 1.0);
        let out = gmres(|v| Ok(&a * v), &b, &DVector::zeros(n), 5, 1e-14).unwrap();
        assert_eq!(out.iterations, 5);
        let true_res = (&b - &a * &out.x).norm();
        assert_relative_eq!(true_res, out.residual_norm, max_relative = 1e-8);
        assert!(true_res < b.norm());
    }
}
