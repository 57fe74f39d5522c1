//! Sample geometric quantiles.
//!
//! The `u`-quantile of a sample `x_1..x_N` is the minimizer over `p` of
//!
//! ```text
//! L(p) = (1/N) * sum_i ( |x_i - p| + <u, x_i - p> ),    |u| < 1.
//! ```
//!
//! `u = 0` gives the spatial median. Solvers are interchangeable strategies behind
//! [`QuantileSolver`] and are looked up by name in a [`SolverRegistry`].

mod newton;
mod weiszfeld;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{distance, norm, Dataset};
use crate::error::{Error, Result};

pub use newton::Newton;
pub use weiszfeld::{weiszfeld_step, Step, Weiszfeld};

/// Index `u` of a geometric quantile, with `|u| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileIndex {
    u: Vec<f64>,
}

impl QuantileIndex {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidInput(
                "quantile index must have dimension >= 1".into(),
            ));
        }
        let r = norm(&u);
        if !(r < 1.0) {
            return Err(Error::IndexOutsideBall(r));
        }
        Ok(Self { u })
    }

    /// The spatial-median request in dimension `dim`.
    pub fn median(dim: usize) -> Self {
        Self { u: vec![0.0; dim] }
    }

    /// `u = beta * xi` for a unit direction `xi`.
    pub fn polar(beta: f64, xi: &[f64]) -> Result<Self> {
        Self::new(xi.iter().map(|x| beta * x).collect())
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.u
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `beta = |u|`.
    pub fn beta(&self) -> f64 {
        norm(&self.u)
    }

    /// `u / |u|`, or `None` for the median.
    pub fn direction(&self) -> Option<Vec<f64>> {
        let b = self.beta();
        (b > 0.0).then(|| self.u.iter().map(|x| x / b).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when a step is at most `tol * data_scale` long.
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to the mean distance of the observations to their centroid.
    pub data_scale: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            data_scale: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if let Some(s) = self.data_scale {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "data_scale must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn scale_for(&self, data: &Dataset) -> f64 {
        self.data_scale.unwrap_or_else(|| data.data_scale())
    }
}

/// A solved quantile and its solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub p: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_step: f64,
}

/// A validated minimization problem handed to a solver strategy.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub data: &'a Dataset,
    pub u: &'a [f64],
    pub scale: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Problem<'_> {
    /// Distance below which an iterate is treated as sitting on an observation.
    #[inline]
    pub fn anchor_eps(&self) -> f64 {
        1e-12 * self.scale
    }
}

/// A strategy that minimizes the quantile loss for `n >= 2` samples that are not on a line.
pub trait QuantileSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// Runs the iteration from `start`. Inputs are already validated.
    fn minimize(&self, problem: &Problem<'_>, start: Vec<f64>) -> QuantilePoint;

    /// Validates the inputs, handles the `N = 1` and `n = 1` cases, then minimizes.
    fn solve(
        &self,
        data: &Dataset,
        u: &QuantileIndex,
        cfg: &SolverConfig,
    ) -> Result<QuantilePoint> {
        cfg.validate()?;
        check_dim(data, u.dim())?;
        if let Some(done) = trivial_quantile(data, u) {
            return Ok(done);
        }
        if data.is_on_single_line() {
            return Err(Error::SingleLineSupport);
        }
        Ok(self.solve_unchecked(data, u, cfg))
    }

    /// Like [`QuantileSolver::solve`] but skips the single-line check. Callers solving many
    /// indices on one sample check once up front.
    fn solve_unchecked(
        &self,
        data: &Dataset,
        u: &QuantileIndex,
        cfg: &SolverConfig,
    ) -> QuantilePoint {
        if let Some(done) = trivial_quantile(data, u) {
            return done;
        }
        let problem = Problem {
            data,
            u: u.as_slice(),
            scale: cfg.scale_for(data),
            tol: cfg.tol,
            max_iter: cfg.max_iter,
        };
        self.minimize(&problem, data.coordinate_median())
    }
}

/// What a strategy does after a step shorter than `tol * scale`.
pub(crate) enum Settle {
    Converged(Vec<f64>),
    Resume(Vec<f64>),
}

/// A short step is accepted only with a first-order certificate `residual <= tol`.
///
/// Near an observation the loss has a kink: steps shrink although the point may be far from
/// optimal, and a minimizer sitting on the observation is only approached geometrically.
/// The nearest observation is then tested with the subgradient condition; if it fails, the
/// iteration resumes from the anchor step taken there whenever that lowers the loss.
pub(crate) fn settle(problem: &Problem<'_>, p: Vec<f64>) -> Settle {
    let eps = problem.anchor_eps();
    if residual_raw(problem.data, problem.u, &p, eps) <= problem.tol {
        return Settle::Converged(p);
    }
    let Some(x) = problem
        .data
        .rows()
        .min_by(|a, b| distance(a, &p).total_cmp(&distance(b, &p)))
    else {
        return Settle::Resume(p);
    };
    if residual_raw(problem.data, problem.u, x, eps) <= problem.tol {
        return Settle::Converged(x.to_vec());
    }
    match weiszfeld_step(problem, x) {
        Step::Optimal => Settle::Converged(x.to_vec()),
        Step::Move(q)
            if loss_raw(problem.data, problem.u, &q) < loss_raw(problem.data, problem.u, &p) =>
        {
            Settle::Resume(q)
        }
        Step::Move(_) => Settle::Resume(p),
    }
}

/// Name-indexed collection of solver strategies.
#[derive(Clone)]
pub struct SolverRegistry {
    entries: Vec<Arc<dyn QuantileSolver>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut reg = Self {
            entries: Vec::new(),
        };
        reg.register(Arc::new(Weiszfeld));
        reg.register(Arc::new(Newton));
        reg
    }
}

impl SolverRegistry {
    /// Adds a strategy, replacing any existing one with the same name.
    pub fn register(&mut self, solver: Arc<dyn QuantileSolver>) {
        self.entries.retain(|s| s.name() != solver.name());
        self.entries.push(solver);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn QuantileSolver>> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: "solver",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }
}

/// Solver used when none is requested.
pub fn default_solver() -> Arc<dyn QuantileSolver> {
    Arc::new(Newton)
}

/// Solves for the geometric `u`-quantile with the default strategy.
pub fn geometric_quantile(
    data: &Dataset,
    u: &QuantileIndex,
    cfg: &SolverConfig,
) -> Result<QuantilePoint> {
    default_solver().solve(data, u, cfg)
}

fn check_dim(data: &Dataset, got: usize) -> Result<()> {
    if data.dim() != got {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got,
        });
    }
    Ok(())
}

fn trivial_quantile(data: &Dataset, u: &QuantileIndex) -> Option<QuantilePoint> {
    if data.len() == 1 {
        return Some(QuantilePoint {
            p: data.row(0).to_vec(),
            iterations: 0,
            converged: true,
            final_step: 0.0,
        });
    }
    if data.dim() == 1 {
        let mut col = data.column(0);
        col.sort_by(f64::total_cmp);
        let tau = (1.0 + u.as_slice()[0]) / 2.0;
        return Some(QuantilePoint {
            p: vec![univariate_quantile(&col, tau)],
            iterations: 0,
            converged: true,
            final_step: 0.0,
        });
    }
    None
}

/// The `tau`-quantile of a sorted sample as the minimizer of the univariate quantile loss,
/// taking the lower endpoint when the minimizer is an interval.
///
/// This is the order statistic `x_(ceil(N * tau))` (1-based). `N * tau` within `1e-9` of an
/// integer is snapped to it so that, e.g., `tau = 0.4` with `N = 300` picks `x_(120)`.
pub fn univariate_quantile(sorted: &[f64], tau: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "univariate_quantile on an empty sample");
    let pos = n as f64 * tau;
    let nearest = pos.round();
    let rank = if (pos - nearest).abs() < 1e-9 {
        nearest
    } else {
        pos.ceil()
    };
    let rank = (rank as usize).clamp(1, n);
    sorted[rank - 1]
}

/// `(1/N) * sum_i (|x_i - p| + <u, x_i - p>)`.
pub fn loss(data: &Dataset, u: &QuantileIndex, p: &[f64]) -> Result<f64> {
    check_dim(data, u.dim())?;
    check_dim(data, p.len())?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "loss evaluated at a non-finite point".into(),
        ));
    }
    Ok(loss_raw(data, u.as_slice(), p))
}

pub(crate) fn loss_raw(data: &Dataset, u: &[f64], p: &[f64]) -> f64 {
    let mut total = 0.0;
    for x in data.rows() {
        let mut sq = 0.0;
        let mut inner = 0.0;
        for j in 0..p.len() {
            let d = x[j] - p[j];
            sq += d * d;
            inner += u[j] * d;
        }
        total += sq.sqrt() + inner;
    }
    total / data.len() as f64
}

/// Optimality residual of `p` for the `u`-quantile problem; zero exactly at the minimizer.
///
/// Away from the observations this is `|(1/N) sum_i (p - x_i)/|p - x_i| - u|`. When `p` sits
/// on observations of multiplicity `m`, it is the distance from
/// `(1/N) (N u - sum_{x_i != p} (p - x_i)/|p - x_i|)` to the ball of radius `m / N`.
pub fn first_order_residual(data: &Dataset, u: &QuantileIndex, p: &[f64]) -> Result<f64> {
    check_dim(data, u.dim())?;
    check_dim(data, p.len())?;
    let eps = 1e-12 * data.data_scale();
    Ok(residual_raw(data, u.as_slice(), p, eps))
}

pub(crate) fn residual_raw(data: &Dataset, u: &[f64], p: &[f64], eps: f64) -> f64 {
    let n = p.len();
    let count = data.len() as f64;
    let mut pull = vec![0.0; n];
    let mut mult = 0usize;
    for x in data.rows() {
        let r = distance(x, p);
        if r <= eps {
            mult += 1;
            continue;
        }
        for j in 0..n {
            pull[j] += (p[j] - x[j]) / r;
        }
    }
    let g: Vec<f64> = (0..n).map(|j| u[j] - pull[j] / count).collect();
    (norm(&g) - mult as f64 / count).max(0.0)
}
