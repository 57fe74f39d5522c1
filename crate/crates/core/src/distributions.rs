//! Seeded samplers for the simulation distributions.
//!
//! Each distribution is a pair of independent coordinates `(v1, v2)`, indexed by the
//! characteristic it is designed to vary and a level `nu in {0, 1, 2}`; the characteristic
//! decreases as `nu` increases.
//!
//! | characteristic | v1                      | v2                             |
//! |----------------|-------------------------|--------------------------------|
//! | dispersion     | N(0,1)/2                | N(0,1), N(0,1)/2, N(0,1)/4     |
//! | skewness       | SN(8), SN(2), SN(0)     | SN(8)/2, SN(2)/2, SN(0)/2      |
//! | kurtosis       | t(5), t(7), t(13)       | t(5)/2, t(7)/2, t(13)/2        |
//! | sphericity     | SN(8), SN(2), SN(0)     | SN(8), SN(2), SN(0)            |

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    Dispersion,
    Skewness,
    Kurtosis,
    Sphericity,
}

impl Characteristic {
    pub const ALL: [Characteristic; 4] = [
        Characteristic::Dispersion,
        Characteristic::Skewness,
        Characteristic::Kurtosis,
        Characteristic::Sphericity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Characteristic::Dispersion => "dispersion",
            Characteristic::Skewness => "skewness",
            Characteristic::Kurtosis => "kurtosis",
            Characteristic::Sphericity => "sphericity",
        }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Characteristic::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "characteristic",
                name: s.to_string(),
            })
    }
}

/// A univariate law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum Law {
    Normal,
    SkewNormal { shape: f64 },
    StudentT { dof: u32 },
}

impl Law {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Law::Normal => rng.sample(StandardNormal),
            Law::SkewNormal { shape } => skew_normal_draw(shape, rng),
            Law::StudentT { dof } => student_t_draw(dof, rng),
        }
    }
}

/// A law divided by `divisor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub law: Law,
    pub divisor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimDistribution {
    pub characteristic: Characteristic,
    pub nu: u8,
}

impl SimDistribution {
    pub fn new(characteristic: Characteristic, nu: u8) -> Result<Self> {
        if nu > 2 {
            return Err(Error::InvalidInput(format!(
                "level nu must be 0, 1 or 2, got {nu}"
            )));
        }
        Ok(Self { characteristic, nu })
    }

    /// The standard bivariate normal (`sphericity`, `nu = 2`).
    pub fn standard_normal() -> Self {
        Self {
            characteristic: Characteristic::Sphericity,
            nu: 2,
        }
    }

    /// Laws of `(v1, v2)`.
    pub fn components(&self) -> [Component; 2] {
        let nu = self.nu as usize;
        let skew_shape = [8.0, 2.0, 0.0][nu];
        let c = |law, divisor| Component { law, divisor };
        match self.characteristic {
            Characteristic::Dispersion => {
                [c(Law::Normal, 2.0), c(Law::Normal, [1.0, 2.0, 4.0][nu])]
            }
            Characteristic::Skewness => {
                let law = Law::SkewNormal { shape: skew_shape };
                [c(law, 1.0), c(law, 2.0)]
            }
            Characteristic::Kurtosis => {
                let law = Law::StudentT {
                    dof: [5, 7, 13][nu],
                };
                [c(law, 1.0), c(law, 2.0)]
            }
            Characteristic::Sphericity => {
                let law = Law::SkewNormal { shape: skew_shape };
                [c(law, 1.0), c(law, 1.0)]
            }
        }
    }

    /// `count` observations drawn with generator `(seed, 0)`; per row, `v1` then `v2`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Dataset> {
        if count == 0 {
            return Err(Error::InvalidInput("sample size must be at least 1".into()));
        }
        let mut rng = rng::seeded(seed, 0);
        let [a, b] = self.components();
        let mut values = Vec::with_capacity(2 * count);
        for _ in 0..count {
            values.push(a.law.draw(&mut rng) / a.divisor);
            values.push(b.law.draw(&mut rng) / b.divisor);
        }
        Dataset::from_flat(values, 2)
    }
}

/// One draw from the skew-normal law with location 0, scale 1 and shape `rho`, via
/// `delta |z0| + sqrt(1 - delta^2) z1`, `delta = rho / sqrt(1 + rho^2)`.
pub fn skew_normal_draw<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> f64 {
    let delta = rho / (1.0 + rho * rho).sqrt();
    let z0: f64 = rng.sample(StandardNormal);
    let z1: f64 = rng.sample(StandardNormal);
    delta * z0.abs() + (1.0 - delta * delta).sqrt() * z1
}

/// One draw from Student's t with `dof` degrees of freedom, `z / sqrt(chi2_dof / dof)`.
pub fn student_t_draw<R: Rng + ?Sized>(dof: u32, rng: &mut R) -> f64 {
    assert!(dof >= 1, "student t needs at least one degree of freedom");
    let z: f64 = rng.sample(StandardNormal);
    let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    z / (chi.sample(rng) / dof as f64).sqrt()
}
