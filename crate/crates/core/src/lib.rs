//! Geometric (spatial) quantiles of multivariate samples and the quantile-based measures of
//! dispersion, skewness, kurtosis and spherical asymmetry built on them.

pub mod bootstrap;
pub mod classical;
pub mod data;
pub mod directions;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod measures;
pub mod rng;
pub mod solver;

pub use data::Dataset;
pub use directions::{DirectionKind, DirectionSet};
pub use error::{Error, Result};
pub use solver::{geometric_quantile, QuantileIndex, QuantilePoint, QuantileSolver, SolverConfig};
