//! Finite-direction estimators of quantile-based dispersion, skewness, kurtosis and
//! spherical asymmetry.
//!
//! For a direction set `Xi` of size `k`, median `m` and `q(u)` the sample `u`-quantile:
//!
//! ```text
//! delta1 = max_xi  |q(b xi) - q(-b xi)|          delta2 = mean_xi |q(b xi) - q(-b xi)|
//! gamma1 = max_xi  |q(b xi) + q(-b xi) - 2m| / delta1
//! gamma2 = mean_xi (q(b xi) - m) / delta2         (a vector)
//! kappa_i = delta_i(b') / delta_i(b)
//! alpha  = log( max_xi |q(b xi) - m| / min_xi |q(b xi) - m| )
//! ```
//!
//! All quantiles for one sample are solved once per distinct index over the antipode
//! closure of `Xi` and shared between the estimators.

mod registry;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{distance, norm, Dataset};
use crate::directions::{AntipodeClosure, DirectionSet};
use crate::error::{Error, Result};
use crate::solver::{
    default_solver, residual_raw, QuantileIndex, QuantilePoint, QuantileSolver, SolverConfig,
};

pub use registry::{Measure, MeasureRegistry};

/// Estimator settings shared by all seven measures.
#[derive(Clone)]
pub struct MeasureParams {
    pub beta: f64,
    /// Upper level for the kurtosis ratios.
    pub beta_prime: Option<f64>,
    pub dirs: DirectionSet,
    pub solver: SolverConfig,
    pub strategy: Arc<dyn QuantileSolver>,
}

impl std::fmt::Debug for MeasureParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeasureParams")
            .field("beta", &self.beta)
            .field("beta_prime", &self.beta_prime)
            .field("k", &self.dirs.len())
            .field("solver", &self.solver)
            .field("strategy", &self.strategy.name())
            .finish()
    }
}

impl MeasureParams {
    pub fn new(beta: f64, beta_prime: Option<f64>, dirs: DirectionSet) -> Result<Self> {
        let params = Self {
            beta,
            beta_prime,
            dirs,
            solver: SolverConfig::default(),
            strategy: default_solver(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_strategy(mut self, strategy: Arc<dyn QuantileSolver>) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if let Some(bp) = self.beta_prime {
            if !(bp > self.beta && bp < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "beta' must satisfy beta < beta' < 1, got beta = {}, beta' = {bp}",
                    self.beta
                )));
            }
        }
        self.solver.validate()
    }

    fn require_beta_prime(&self) -> Result<f64> {
        self.beta_prime
            .ok_or_else(|| Error::InvalidInput("kurtosis needs beta'".into()))
    }
}

/// Quantiles solved at one level over the closure directions.
#[derive(Debug, Clone)]
pub struct Level {
    pub beta: f64,
    pub points: Vec<QuantilePoint>,
}

/// Every quantile the estimators need for one sample.
#[derive(Debug, Clone)]
pub struct SolvedQuantiles {
    pub closure: AntipodeClosure,
    pub median: Option<QuantilePoint>,
    pub levels: Vec<Level>,
    /// Degeneracy threshold `1e-8 * data_scale`.
    pub threshold: f64,
    pub diagnostics: SolverDiagnostics,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub strategy: String,
    pub solves: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub all_converged: bool,
    pub max_residual: f64,
}

impl SolvedQuantiles {
    /// Solves the median (when asked) and `q(beta xi)` for every closure direction and level.
    pub fn compute(
        data: &Dataset,
        params: &MeasureParams,
        betas: &[f64],
        with_median: bool,
    ) -> Result<Self> {
        params.validate()?;
        if params.dirs.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: params.dirs.dim(),
            });
        }
        if data.dim() >= 2 && data.len() >= 2 && data.is_on_single_line() {
            return Err(Error::SingleLineSupport);
        }
        let closure = params.dirs.antipode_closure();
        let scale = params.solver.scale_for(data);
        let cfg = SolverConfig {
            data_scale: Some(scale),
            ..params.solver
        };
        let strategy = params.strategy.as_ref();

        let mut indices: Vec<QuantileIndex> = Vec::new();
        if with_median {
            indices.push(QuantileIndex::median(data.dim()));
        }
        for &beta in betas {
            for xi in closure.dirs.iter() {
                indices.push(QuantileIndex::polar(beta, xi)?);
            }
        }
        let solved: Vec<QuantilePoint> = indices
            .par_iter()
            .map(|u| strategy.solve_unchecked(data, u, &cfg))
            .collect();

        let eps = 1e-12 * scale;
        let mut diagnostics = SolverDiagnostics {
            strategy: strategy.name().to_string(),
            solves: solved.len(),
            all_converged: true,
            ..Default::default()
        };
        let k = closure.dirs.len();
        for (pos, (q, u)) in solved.iter().zip(&indices).enumerate() {
            diagnostics.total_iterations += q.iterations;
            diagnostics.max_iterations = diagnostics.max_iterations.max(q.iterations);
            if !q.converged {
                let slot = pos - usize::from(with_median);
                let direction = if with_median && pos == 0 {
                    0
                } else {
                    original_direction(&closure, slot % k)
                };
                return Err(Error::NotConverged {
                    direction,
                    u: u.as_slice().to_vec(),
                    iterations: q.iterations,
                });
            }
            if data.dim() >= 2 && data.len() >= 2 {
                let r = residual_raw(data, u.as_slice(), &q.p, eps);
                diagnostics.max_residual = diagnostics.max_residual.max(r);
            }
        }

        let mut iter = solved.into_iter();
        let median = if with_median { iter.next() } else { None };
        let levels = betas
            .iter()
            .map(|&beta| Level {
                beta,
                points: iter.by_ref().take(k).collect(),
            })
            .collect();
        Ok(Self {
            closure,
            median,
            levels,
            threshold: 1e-8 * scale,
            diagnostics,
        })
    }

    /// Number of directions in the original set.
    pub fn k(&self) -> usize {
        self.closure.source.len()
    }

    fn level(&self, idx: usize) -> &Level {
        &self.levels[idx]
    }

    /// `q(beta xi_l)` and `q(-beta xi_l)` for the `l`-th original direction.
    pub fn pair(&self, level: usize, l: usize) -> (&[f64], &[f64]) {
        let i = self.closure.source[l];
        let j = self.closure.antipode[i];
        let pts = &self.level(level).points;
        (&pts[i].p, &pts[j].p)
    }

    fn median_point(&self) -> &[f64] {
        &self
            .median
            .as_ref()
            .expect("median was not solved for this estimator")
            .p
    }

    /// `(delta1, delta2)` at a level.
    pub fn dispersion(&self, level: usize) -> (f64, f64) {
        let widths: Vec<f64> = (0..self.k())
            .map(|l| {
                let (a, b) = self.pair(level, l);
                distance(a, b)
            })
            .collect();
        let max = widths.iter().copied().fold(0.0, f64::max);
        let mean = widths.iter().sum::<f64>() / widths.len() as f64;
        (max, mean)
    }

    fn nondegenerate_dispersion(&self, level: usize) -> Result<(f64, f64)> {
        let (d1, d2) = self.dispersion(level);
        if d1 <= self.threshold {
            return Err(Error::DegenerateDispersion {
                beta: self.level(level).beta,
            });
        }
        Ok((d1, d2))
    }

    /// `(gamma1, gamma2)` at a level.
    pub fn skewness(&self, level: usize) -> Result<(f64, Vec<f64>)> {
        let (d1, d2) = self.nondegenerate_dispersion(level)?;
        let m = self.median_point();
        let dim = m.len();
        let mut worst: f64 = 0.0;
        let mut mean = vec![0.0; dim];
        for l in 0..self.k() {
            let (a, b) = self.pair(level, l);
            let mut off = 0.0;
            for j in 0..dim {
                let s = a[j] + b[j] - 2.0 * m[j];
                off += s * s;
                mean[j] += a[j] - m[j];
            }
            worst = worst.max(off.sqrt());
        }
        let k = self.k() as f64;
        let gamma2 = mean.iter().map(|v| v / k / d2).collect();
        Ok((worst / d1, gamma2))
    }

    /// `alpha` at a level.
    pub fn spherical_asymmetry(&self, level: usize) -> Result<f64> {
        let m = self.median_point();
        let mut hi: f64 = 0.0;
        let mut lo = f64::INFINITY;
        for l in 0..self.k() {
            let (a, _) = self.pair(level, l);
            let r = distance(a, m);
            if r <= self.threshold {
                return Err(Error::DegenerateRadius { direction: l });
            }
            hi = hi.max(r);
            lo = lo.min(r);
        }
        Ok((hi / lo).ln())
    }
}

fn original_direction(closure: &AntipodeClosure, slot: usize) -> usize {
    closure
        .source
        .iter()
        .position(|&i| i == slot)
        .or_else(|| {
            closure
                .source
                .iter()
                .position(|&i| closure.antipode[i] == slot)
        })
        .unwrap_or(slot)
}

/// `(delta1, delta2)`.
pub fn dispersion(data: &Dataset, params: &MeasureParams) -> Result<(f64, f64)> {
    let solved = SolvedQuantiles::compute(data, params, &[params.beta], false)?;
    Ok(solved.dispersion(0))
}

/// `(gamma1, gamma2)`.
pub fn skewness(data: &Dataset, params: &MeasureParams) -> Result<(f64, Vec<f64>)> {
    SolvedQuantiles::compute(data, params, &[params.beta], true)?.skewness(0)
}

/// `(kappa1, kappa2)`; needs `beta_prime`.
pub fn kurtosis(data: &Dataset, params: &MeasureParams) -> Result<(f64, f64)> {
    let bp = params.require_beta_prime()?;
    let solved = SolvedQuantiles::compute(data, params, &[params.beta, bp], false)?;
    kurtosis_from(&solved, 0, 1)
}

fn kurtosis_from(solved: &SolvedQuantiles, low: usize, high: usize) -> Result<(f64, f64)> {
    let (l1, l2) = solved.nondegenerate_dispersion(low)?;
    let (h1, h2) = solved.dispersion(high);
    Ok((h1 / l1, h2 / l2))
}

/// `alpha`.
pub fn spherical_asymmetry(data: &Dataset, params: &MeasureParams) -> Result<f64> {
    SolvedQuantiles::compute(data, params, &[params.beta], true)?.spherical_asymmetry(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRow {
    pub xi: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
}

/// All seven measures at one `(beta, beta', Xi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub beta: f64,
    pub beta_prime: Option<f64>,
    pub k: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub gamma1: f64,
    pub gamma2: Vec<f64>,
    pub gamma2_norm: f64,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub alpha: f64,
    pub median: Vec<f64>,
    pub per_direction: Vec<DirectionRow>,
    pub diagnostics: SolverDiagnostics,
}

/// Computes every measure from one shared set of quantile solves.
pub fn report(data: &Dataset, params: &MeasureParams) -> Result<MeasureReport> {
    let mut betas = vec![params.beta];
    betas.extend(params.beta_prime);
    let solved = SolvedQuantiles::compute(data, params, &betas, true)?;
    let (delta1, delta2) = solved.dispersion(0);
    let (gamma1, gamma2) = solved.skewness(0)?;
    let alpha = solved.spherical_asymmetry(0)?;
    let (kappa1, kappa2) = match params.beta_prime {
        Some(_) => {
            let (a, b) = kurtosis_from(&solved, 0, 1)?;
            (Some(a), Some(b))
        }
        None => (None, None),
    };
    let per_direction = params
        .dirs
        .iter()
        .enumerate()
        .map(|(l, xi)| {
            let (a, b) = solved.pair(0, l);
            DirectionRow {
                xi: xi.to_vec(),
                q_plus: a.to_vec(),
                q_minus: b.to_vec(),
            }
        })
        .collect();
    Ok(MeasureReport {
        beta: params.beta,
        beta_prime: params.beta_prime,
        k: params.dirs.len(),
        delta1,
        delta2,
        gamma1,
        gamma2_norm: norm(&gamma2),
        gamma2,
        kappa1,
        kappa2,
        alpha,
        median: solved.median_point().to_vec(),
        per_direction,
        diagnostics: solved.diagnostics,
    })
}
