//! Damped Newton iteration for small square or rectangular nonlinear systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{DmcpError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Converged when the largest residual component drops below this.
    pub tolerance: f64,
    /// Largest change of any unknown in one step.
    pub max_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 200, tolerance: 1e-10, max_step: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn jacobian<F>(f: &F, x: &[f64], fx: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut jac = DMatrix::zeros(fx.len(), x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        let up = f(&probe)?;
        probe[j] = x[j] - h;
        let down = f(&probe)?;
        probe[j] = x[j];
        for i in 0..fx.len() {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Solves `f(x) = 0` from `seed`.
///
/// Steps use the SVD pseudo-inverse of a central-difference Jacobian, so
/// underdetermined systems take minimum-norm steps. Steps are clipped to
/// `max_step` per component and halved until the residual decreases.
pub fn solve<F>(f: F, seed: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = seed.to_vec();
    let mut fx = f(&x)?;
    let mut norm = max_norm(&fx);
    for iteration in 0..opts.max_iterations {
        if !norm.is_finite() {
            break;
        }
        if norm < opts.tolerance {
            return Ok(NewtonOutcome { solution: x, iterations: iteration, residual_norm: norm });
        }
        let jac = jacobian(&f, &x, &fx)?;
        let rhs = -DVector::from_column_slice(&fx);
        let svd = jac.svd(true, true);
        let Ok(step) = svd.solve(&rhs, 1e-12) else { break };
        let biggest = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        let clip = if biggest > opts.max_step { opts.max_step / biggest } else { 1.0 };

        let mut lambda = clip;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + lambda * si).collect();
            let ft = f(&trial)?;
            let nt = max_norm(&ft);
            if nt < norm {
                accepted = Some((trial, ft, nt));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, ft, nt)) => {
                x = xt;
                fx = ft;
                norm = nt;
            }
            None => {
                return Err(DmcpError::NoConvergence { iterations: iteration + 1, residual_norm: norm });
            }
        }
    }
    if norm < opts.tolerance {
        return Ok(NewtonOutcome { solution: x, iterations: opts.max_iterations, residual_norm: norm });
    }
    Err(DmcpError::NoConvergence { iterations: opts.max_iterations, residual_norm: norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_system() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]]);
        let out = solve(f, &[1.0, 0.5], &NewtonOptions::default()).unwrap();
        let r = 2f64.sqrt();
        assert!((out.solution[0] - r).abs() < 1e-9 && (out.solution[1] - r).abs() < 1e-9);
    }

    #[test]
    fn underdetermined_system() {
        let f = |x: &[f64]| Ok(vec![x[0] + 2.0 * x[1] + 3.0 * x[2] - 1.0]);
        let out = solve(f, &[0.0, 0.0, 0.0], &NewtonOptions::default()).unwrap();
        assert!(out.residual_norm < 1e-10);
    }

    #[test]
    fn unsolvable_reports_residual() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + 1.0]);
        match solve(f, &[0.3], &NewtonOptions::default()) {
            Err(DmcpError::NoConvergence { residual_norm, .. }) => assert!(residual_norm >= 1.0),
            other => panic!("{other:?}"),
        }
    }
}
