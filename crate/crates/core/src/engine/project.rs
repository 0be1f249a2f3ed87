//! Gauss–Newton projection onto the zero set of a list of constraints.

use thiserror::Error;

use super::constraint::{ConstraintEvaluator, EvalError};
use crate::linalg::{rank_nullspaces, solve_square, Matrix};

const MAX_ITERATIONS: usize = 50;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("projection did not converge (max |φ| = {residual:e})")]
    ProjectionDiverged { residual: f64 },
    #[error("constraint Jacobian has rank {rank} for {constraints} constraints")]
    JacobianRankDeficient { rank: usize, constraints: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn values_and_jacobian(
    x: &[f64],
    constraints: &[ConstraintEvaluator],
) -> Result<(Vec<f64>, Matrix<f64>), EvalError> {
    let mut phi = Vec::with_capacity(constraints.len());
    let mut jac = Matrix::zeros(constraints.len(), x.len());
    for (i, c) in constraints.iter().enumerate() {
        let (v, g) = c.value_gradient(x)?;
        phi.push(v);
        for (j, gj) in g.into_iter().enumerate() {
            jac.set(i, j, gj);
        }
    }
    Ok((phi, jac))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Minimal-norm Gauss–Newton step `Jᵀ(JJᵀ)⁻¹φ`.
fn step(jac: &Matrix<f64>, phi: &[f64]) -> Option<Vec<f64>> {
    let jt = jac.transpose();
    let y = solve_square(&jac.mul(&jt), phi).ok()?;
    Some(jt.mul_vec(&y))
}

/// Moves `point` onto `{φ = 0}` for every constraint, to `max |φ| ≤ tol`.
pub fn project_to_level(
    point: &[f64],
    constraints: &[ConstraintEvaluator],
    tol: f64,
) -> Result<Vec<f64>, ProjectionError> {
    project_to_level_fixing(point, constraints, tol, None)
}

/// [`project_to_level`] holding one coordinate (typically time) fixed.
pub fn project_to_level_fixing(
    point: &[f64],
    constraints: &[ConstraintEvaluator],
    tol: f64,
    fixed: Option<usize>,
) -> Result<Vec<f64>, ProjectionError> {
    let mut x = point.to_vec();
    if constraints.is_empty() {
        return Ok(x);
    }
    let mut residual = f64::INFINITY;
    for iteration in 0..MAX_ITERATIONS {
        let (phi, mut jac) = match values_and_jacobian(&x, constraints) {
            Ok(vj) => vj,
            // wandered out of the domain
            Err(EvalError::Domain(_)) if iteration > 0 => break,
            Err(e) => return Err(e.into()),
        };
        if let Some(f) = fixed {
            for i in 0..constraints.len() {
                jac.set(i, f, 0.0);
            }
        }
        residual = max_abs(&phi);
        if !residual.is_finite() {
            break;
        }
        let rank = rank_nullspaces(&jac, 1e-10).map_err(EvalError::from)?.rank;
        if rank < constraints.len() {
            if iteration > 0 && residual <= tol {
                return Ok(x);
            }
            if iteration == 0 {
                return Err(ProjectionError::JacobianRankDeficient {
                    rank,
                    constraints: constraints.len(),
                });
            }
            break;
        }
        let Some(dx) = step(&jac, &phi) else { break };
        if residual <= tol {
            // one polishing step, kept only if it helps
            let polished: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - d).collect();
            let values: Result<Vec<f64>, _> =
                constraints.iter().map(|c| c.value(&polished)).collect();
            if matches!(values, Ok(p) if max_abs(&p) <= residual) {
                return Ok(polished);
            }
            return Ok(x);
        }
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi -= d;
        }
    }
    Err(ProjectionError::ProjectionDiverged { residual })
}
