use super::{settle, Problem, QuantilePoint, QuantileSolver, Settle};
use crate::data::{distance, norm};

/// Outcome of one fixed-point step.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    /// The current point satisfies the subgradient optimality condition at an observation.
    Optimal,
    Move(Vec<f64>),
}

/// Modified Weiszfeld iteration
/// `p <- (sum_i x_i / r_i + N u) / (sum_i 1 / r_i)`, `r_i = |x_i - p|`.
///
/// When the iterate sits on observations (within `1e-12 * scale`) the step excludes them and
/// is shrunk toward the current point along the clamped subgradient (Vardi and Zhang), or
/// stops if the subgradient condition already holds there.
#[derive(Debug, Clone, Copy, Default)]
pub struct Weiszfeld;

impl QuantileSolver for Weiszfeld {
    fn name(&self) -> &'static str {
        "weiszfeld"
    }

    fn minimize(&self, problem: &Problem<'_>, start: Vec<f64>) -> QuantilePoint {
        let mut p = start;
        let mut last = f64::INFINITY;
        for it in 1..=problem.max_iter {
            match weiszfeld_step(problem, &p) {
                Step::Optimal => {
                    return QuantilePoint {
                        p,
                        iterations: it,
                        converged: true,
                        final_step: 0.0,
                    }
                }
                Step::Move(next) => {
                    last = distance(&next, &p);
                    p = next;
                    if last <= problem.tol * problem.scale {
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

/// One modified Weiszfeld step from `p`.
pub fn weiszfeld_step(problem: &Problem<'_>, p: &[f64]) -> Step {
    let n = p.len();
    let count = problem.data.len() as f64;
    let eps = problem.anchor_eps();
    let mut num = vec![0.0; n];
    let mut pull = vec![0.0; n];
    let mut den = 0.0;
    let mut mult = 0usize;
    for x in problem.data.rows() {
        let r = distance(x, p);
        if r <= eps {
            mult += 1;
            continue;
        }
        let w = 1.0 / r;
        den += w;
        for j in 0..n {
            num[j] += w * x[j];
            pull[j] += w * (p[j] - x[j]);
        }
    }
    if den == 0.0 {
        return Step::Optimal;
    }
    let target: Vec<f64> = (0..n)
        .map(|j| (num[j] + count * problem.u[j]) / den)
        .collect();
    if mult == 0 {
        return Step::Move(target);
    }
    let descent: Vec<f64> = (0..n).map(|j| count * problem.u[j] - pull[j]).collect();
    let strength = norm(&descent);
    let m = mult as f64;
    if strength <= m {
        return Step::Optimal;
    }
    let keep = m / strength;
    Step::Move(
        (0..n)
            .map(|j| (1.0 - keep) * target[j] + keep * p[j])
            .collect(),
    )
}
