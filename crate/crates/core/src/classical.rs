//! Moment-based comparison statistics and coordinate-wise univariate quantile measures.
//!
//! The sample covariance `S` used by Mardia's statistics is normalized by `1/(N - 1)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::solver::univariate_quantile;

/// `(1/N) sum_i |v_i - mean|^2`, the trace of the `1/N` covariance.
pub fn frechet_variance(data: &Dataset) -> f64 {
    let c = data.centroid();
    data.rows()
        .map(|r| r.iter().zip(&c).map(|(x, m)| (x - m).powi(2)).sum::<f64>())
        .sum::<f64>()
        / data.len() as f64
}

/// Centered observations as columns, and the inverse sample covariance.
fn whitening(data: &Dataset) -> Result<(Vec<DVector<f64>>, DMatrix<f64>)> {
    if data.len() < 2 {
        return Err(Error::SingularCovariance);
    }
    let n = data.dim();
    let mean = DVector::from_vec(data.centroid());
    let centered: Vec<DVector<f64>> = data
        .rows()
        .map(|r| DVector::from_column_slice(r) - &mean)
        .collect();
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for c in &centered {
        cov += c * c.transpose();
    }
    cov /= (data.len() - 1) as f64;
    let inv = cov
        .cholesky()
        .map(|ch| ch.inverse())
        .ok_or(Error::SingularCovariance)?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    Ok((centered, inv))
}

/// Mardia's multivariate skewness `(1/N^2) sum_i sum_j [(v_i - mean)^T S^-1 (v_j - mean)]^3`.
pub fn mardia_skewness(data: &Dataset) -> Result<f64> {
    let (centered, inv) = whitening(data)?;
    let projected: Vec<DVector<f64>> = centered.iter().map(|c| &inv * c).collect();
    let mut total = 0.0;
    for a in &centered {
        for b in &projected {
            total += a.dot(b).powi(3);
        }
    }
    let n = data.len() as f64;
    Ok(total / (n * n))
}

/// Mardia's multivariate kurtosis `(1/N) sum_i [(v_i - mean)^T S^-1 (v_i - mean)]^2`.
pub fn mardia_kurtosis(data: &Dataset) -> Result<f64> {
    let (centered, inv) = whitening(data)?;
    let total: f64 = centered.iter().map(|c| c.dot(&(&inv * c)).powi(2)).sum();
    Ok(total / data.len() as f64)
}

/// Quantile-based dispersion, skewness and kurtosis of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnivariateMeasures {
    /// `Q_{(1+b)/2} - Q_{(1-b)/2}`
    pub delta0: f64,
    /// `(Q_{(1+b)/2} + Q_{(1-b)/2} - 2 Q_{1/2}) / delta0`
    pub gamma0: f64,
    /// `delta0(b') / delta0(b)`
    pub kappa0: f64,
}

/// `(delta0, gamma0)` at level `beta`.
pub fn univariate_dispersion_skewness(column: &[f64], beta: f64) -> Result<(f64, f64)> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let sorted = sorted_column(column)?;
    delta_gamma(&sorted, beta)
}

/// Uses the same lower-endpoint quantile convention as the `n = 1` geometric quantile.
pub fn univariate_quantile_measures(
    column: &[f64],
    beta: f64,
    beta_prime: f64,
) -> Result<UnivariateMeasures> {
    if !(0.0 < beta && beta < beta_prime && beta_prime < 1.0) {
        return Err(Error::InvalidInput(format!(
            "need 0 < beta < beta' < 1, got beta = {beta}, beta' = {beta_prime}"
        )));
    }
    let sorted = sorted_column(column)?;
    let (delta0, gamma0) = delta_gamma(&sorted, beta)?;
    Ok(UnivariateMeasures {
        delta0,
        gamma0,
        kappa0: spread(&sorted, beta_prime) / delta0,
    })
}

fn sorted_column(column: &[f64]) -> Result<Vec<f64>> {
    if column.len() < 2 {
        return Err(Error::InvalidInput(
            "column needs at least two values".into(),
        ));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "column contains non-finite values".into(),
        ));
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

// `(1 + -b) / 2` matches the index `u = -b` the solver receives for direction `-1`.
fn spread(sorted: &[f64], b: f64) -> f64 {
    univariate_quantile(sorted, (1.0 + b) / 2.0) - univariate_quantile(sorted, (1.0 + -b) / 2.0)
}

fn delta_gamma(sorted: &[f64], beta: f64) -> Result<(f64, f64)> {
    let delta0 = spread(sorted, beta);
    if delta0 <= 0.0 {
        return Err(Error::ZeroUnivariateDispersion);
    }
    let q = |tau: f64| univariate_quantile(sorted, tau);
    let gamma0 = (q((1.0 + beta) / 2.0) + q((1.0 + -beta) / 2.0) - 2.0 * q(0.5)) / delta0;
    Ok((delta0, gamma0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub frechet_variance: f64,
    pub mardia_skewness: f64,
    pub mardia_kurtosis: f64,
    pub per_coordinate: Vec<UnivariateMeasures>,
}

pub fn classical_report(data: &Dataset, beta: f64, beta_prime: f64) -> Result<ClassicalReport> {
    let per_coordinate = (0..data.dim())
        .map(|j| univariate_quantile_measures(&data.column(j), beta, beta_prime))
        .collect::<Result<_>>()?;
    Ok(ClassicalReport {
        frechet_variance: frechet_variance(data),
        mardia_skewness: mardia_skewness(data)?,
        mardia_kurtosis: mardia_kurtosis(data)?,
        per_coordinate,
    })
}
