use nalgebra::{DMatrix, Vector3};

use super::problem::Problem;
use super::SolverVector;
use crate::error::{Error, Result};

/// Solve `F(U, ω, t) = 0` with a dense central-difference Jacobian and LU.
///
/// Shares nothing with the GMRES path beyond `F` itself; used to check the
/// continuation solution.
pub fn dense_kkt_oracle(
    problem: &Problem<'_>,
    omega: &Vector3<f64>,
    t: f64,
    start: Option<SolverVector>,
) -> Result<SolverVector> {
    let cfg = problem.cfg;
    let n = cfg.dim();
    let mut u = start.unwrap_or_else(|| SolverVector::seed(cfg));
    let mut f = problem.residual(&u, omega, t)?;
    for _ in 0..200 {
        if f.norm() <= 1e-11 {
            return Ok(u);
        }
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-7 * (1.0 + u.0[k].abs());
            let mut up = u.clone();
            let mut um = u.clone();
            up.0[k] += h;
            um.0[k] -= h;
            let col = (problem.residual(&up, omega, t)? - problem.residual(&um, omega, t)?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let d = jac.lu().solve(&(-&f)).ok_or(Error::NewtonNonConvergence {
            iterations: 0,
            residual: f.norm(),
        })?;
        let mut alpha = 1.0f64;
        for i in 0..cfg.stages {
            let dv = d[3 * i + 1];
            if dv < 0.0 {
                alpha = alpha.min(0.9 * u.v(i) / -dv);
            }
        }
        let norm = f.norm();
        loop {
            let trial = SolverVector(&u.0 + &d * alpha);
            let ft = problem.residual(&trial, omega, t)?;
            if ft.norm() < norm || alpha < 1e-10 {
                u = trial;
                f = ft;
                break;
            }
            alpha *= 0.5;
        }
    }
    Err(Error::NewtonNonConvergence {
        iterations: 200,
        residual: f.norm(),
    })
}
