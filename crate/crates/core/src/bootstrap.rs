//! Pivotal bootstrap confidence balls and the coverage study.
//!
//! For an estimate `t` and bootstrap replicates `t*_1..t*_T`, the region is the closed ball
//! around `t` whose radius is the `ceil(level * T)`-th smallest of `|t*_s - t|`. The pivotal
//! region `{t - w : |w| <= r}` and the percentile ball around `t` coincide for balls.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{distance, Dataset};
use crate::distributions::SimDistribution;
use crate::error::{Error, Result};
use crate::measures::{Measure, MeasureParams};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRegion {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Nominal coverage `1 - tau`.
    pub level: f64,
    pub replicates: usize,
    /// Resamples on which the estimator failed and that were drawn again.
    pub redraws: usize,
    /// Sorted `|t*_s - t|`.
    #[serde(skip)]
    pub distances: Vec<f64>,
}

impl ConfidenceRegion {
    /// Closed-ball membership.
    pub fn contains(&self, theta: &[f64]) -> Result<bool> {
        if theta.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                got: theta.len(),
            });
        }
        Ok(distance(theta, &self.center) <= self.radius)
    }

    /// Radius the same replicates give at another level.
    pub fn radius_at(&self, level: f64) -> Result<f64> {
        order_statistic(&self.distances, level)
    }
}

/// `contains` as a free function.
pub fn contains(region: &ConfidenceRegion, theta: &[f64]) -> Result<bool> {
    region.contains(theta)
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    Ok(())
}

/// The `ceil(level * T)`-th smallest of sorted values.
fn order_statistic(sorted: &[f64], level: f64) -> Result<f64> {
    check_level(level)?;
    if sorted.is_empty() {
        return Err(Error::InvalidInput("no bootstrap replicates".into()));
    }
    let pos = level * sorted.len() as f64;
    let nearest = pos.round();
    let rank = if (pos - nearest).abs() < 1e-9 {
        nearest
    } else {
        pos.ceil()
    };
    let rank = (rank as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Bootstrap ball for `measure` from `replicates` row resamples.
///
/// Replicate `s` draws from generator `(seed, s + 1)`. A resample on which the estimator
/// fails is redrawn from the same generator; more than `10%` redraws in total aborts.
pub fn bootstrap_region(
    data: &Dataset,
    measure: &dyn Measure,
    params: &MeasureParams,
    level: f64,
    replicates: usize,
    seed: u64,
) -> Result<ConfidenceRegion> {
    check_level(level)?;
    if replicates == 0 {
        return Err(Error::InvalidInput(
            "need at least one bootstrap replicate".into(),
        ));
    }
    let center = measure.evaluate(data, params)?;
    let budget = replicates / 10;
    let n = data.len();

    let outcomes: Vec<(std::result::Result<Vec<f64>, Error>, usize)> = (0..replicates)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng::seeded(seed, s as u64 + 1);
            let mut redraws = 0;
            loop {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                match measure.evaluate(&data.select_rows(&idx), params) {
                    Ok(v) => return (Ok(v), redraws),
                    Err(e) if redraws >= budget => return (Err(e), redraws + 1),
                    Err(_) => redraws += 1,
                }
            }
        })
        .collect();

    let redraws: usize = outcomes.iter().map(|(_, r)| r).sum();
    let mut distances = Vec::with_capacity(replicates);
    let mut last_error = None;
    for (res, _) in outcomes {
        match res {
            Ok(v) => distances.push(distance(&v, &center)),
            Err(e) => last_error = Some(e),
        }
    }
    if redraws > budget || last_error.is_some() {
        return Err(Error::TooManyRedraws {
            redraws,
            replicates,
            last: last_error.map(|e| e.to_string()).unwrap_or_default(),
        });
    }
    distances.sort_by(f64::total_cmp);
    let radius = order_statistic(&distances, level)?;
    Ok(ConfidenceRegion {
        center,
        radius,
        level,
        replicates,
        redraws,
        distances,
    })
}

/// Settings of the coverage study: repeated samples from a distribution whose true measure
/// value is known.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageSpec {
    pub distribution: SimDistribution,
    pub truth: Vec<f64>,
    pub reps: usize,
    pub sample_size: usize,
    pub replicates: usize,
    pub level: f64,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub measure: String,
    pub beta: f64,
    pub k: usize,
    pub reps: usize,
    pub covered: usize,
    pub coverage: f64,
    pub level: f64,
    pub mean_radius: f64,
    pub redraws: usize,
}

/// Repetition `r` samples with seed `base_seed + r` and bootstraps with the same seed (the
/// sample uses stream 0, replicates use streams `1..=T`).
pub fn coverage(
    measure: &dyn Measure,
    params: &MeasureParams,
    spec: &CoverageSpec,
) -> Result<CoverageReport> {
    if spec.reps == 0 {
        return Err(Error::InvalidInput(
            "coverage needs at least one repetition".into(),
        ));
    }
    let regions: Vec<ConfidenceRegion> = (0..spec.reps)
        .into_par_iter()
        .map(|r| {
            let seed = spec.base_seed.wrapping_add(r as u64);
            let data = spec.distribution.sample(spec.sample_size, seed)?;
            bootstrap_region(&data, measure, params, spec.level, spec.replicates, seed)
        })
        .collect::<Result<_>>()?;
    let mut covered = 0;
    for region in &regions {
        if region.contains(&spec.truth)? {
            covered += 1;
        }
    }
    Ok(CoverageReport {
        measure: measure.name().to_string(),
        beta: params.beta,
        k: params.dirs.len(),
        reps: spec.reps,
        covered,
        coverage: covered as f64 / spec.reps as f64,
        level: spec.level,
        mean_radius: regions.iter().map(|r| r.radius).sum::<f64>() / spec.reps as f64,
        redraws: regions.iter().map(|r| r.redraws).sum(),
    })
}
