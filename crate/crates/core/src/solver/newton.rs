use nalgebra::{DMatrix, DVector};

use super::weiszfeld::{weiszfeld_step, Step};
use super::{loss_raw, settle, Problem, QuantilePoint, QuantileSolver, Settle};
use crate::data::distance;

/// Damped Newton iteration on the smooth part of the loss, with Armijo backtracking.
///
/// Away from the observations the loss is twice differentiable with Hessian
/// `(1/N) sum_i (I - d_i d_i^T) / r_i`, `d_i = (p - x_i) / r_i`, which is positive definite
/// unless the sample lies on a line. Iterates that land on an observation, fail the
/// Cholesky factorization, or fail the line search take a modified Weiszfeld step instead,
/// so the loss never increases.
#[derive(Debug, Clone, Copy, Default)]
pub struct Newton;

impl QuantileSolver for Newton {
    fn name(&self) -> &'static str {
        "newton"
    }

    fn minimize(&self, problem: &Problem<'_>, start: Vec<f64>) -> QuantilePoint {
        let mut p = start;
        let mut last = f64::INFINITY;
        let stop = problem.tol * problem.scale;
        for it in 1..=problem.max_iter {
            let next = match newton_step(problem, &p) {
                Some(q) => q,
                None => match weiszfeld_step(problem, &p) {
                    Step::Optimal => {
                        return QuantilePoint {
                            p,
                            iterations: it,
                            converged: true,
                            final_step: 0.0,
                        }
                    }
                    Step::Move(q) => q,
                },
            };
            last = distance(&next, &p);
            p = next;
            if last <= stop {
                match settle(problem, p) {
                    Settle::Converged(p) => {
                        return QuantilePoint {
                            p,
                            iterations: it,
                            converged: true,
                            final_step: last,
                        }
                    }
                    Settle::Resume(q) => p = q,
                }
            }
        }
        QuantilePoint {
            p,
            iterations: problem.max_iter,
            converged: false,
            final_step: last,
        }
    }
}

/// A damped Newton step, or `None` when the point is on an observation or no descent
/// step is found.
fn newton_step(problem: &Problem<'_>, p: &[f64]) -> Option<Vec<f64>> {
    let n = p.len();
    let count = problem.data.len() as f64;
    let eps = problem.anchor_eps();
    let mut grad = DVector::<f64>::zeros(n);
    let mut hess = DMatrix::<f64>::zeros(n, n);
    let mut dir = vec![0.0; n];
    for x in problem.data.rows() {
        let r = distance(x, p);
        if r <= eps {
            return None;
        }
        for j in 0..n {
            dir[j] = (p[j] - x[j]) / r;
            grad[j] += dir[j];
        }
        let w = 1.0 / r;
        for a in 0..n {
            hess[(a, a)] += w;
            for b in 0..n {
                hess[(a, b)] -= w * dir[a] * dir[b];
            }
        }
    }
    for j in 0..n {
        grad[j] = grad[j] / count - problem.u[j];
    }
    hess /= count;

    let chol = hess.cholesky()?;
    let step = -chol.solve(&grad);
    let step_len = step.norm();
    if !step_len.is_finite() {
        return None;
    }
    if step_len <= problem.tol * problem.scale {
        return Some(p.iter().zip(step.iter()).map(|(a, s)| a + s).collect());
    }

    let slope = grad.dot(&step);
    if slope >= 0.0 {
        return None;
    }
    let base = loss_raw(problem.data, problem.u, p);
    let slack = 4.0 * f64::EPSILON * base.abs().max(problem.scale);
    let mut t = 1.0;
    let mut trial = vec![0.0; n];
    while t * step_len > 0.1 * problem.tol * problem.scale {
        for j in 0..n {
            trial[j] = p[j] + t * step[j];
        }
        if loss_raw(problem.data, problem.u, &trial) <= base + 1e-4 * t * slope + slack {
            return Some(trial);
        }
        t *= 0.5;
    }
    None
}
