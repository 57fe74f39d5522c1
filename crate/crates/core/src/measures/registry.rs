use std::sync::Arc;

use super::{dispersion, kurtosis, skewness, spherical_asymmetry, MeasureParams};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// A (possibly vector-valued) statistic of a sample, selectable by name.
pub trait Measure: Send + Sync {
    fn name(&self) -> &'static str;

    fn needs_beta_prime(&self) -> bool {
        false
    }

    fn evaluate(&self, data: &Dataset, params: &MeasureParams) -> Result<Vec<f64>>;
}

type Evaluator = fn(&Dataset, &MeasureParams) -> Result<Vec<f64>>;

struct Builtin {
    name: &'static str,
    needs_beta_prime: bool,
    eval: Evaluator,
}

impl Measure for Builtin {
    fn name(&self) -> &'static str {
        self.name
    }

    fn needs_beta_prime(&self) -> bool {
        self.needs_beta_prime
    }

    fn evaluate(&self, data: &Dataset, params: &MeasureParams) -> Result<Vec<f64>> {
        (self.eval)(data, params)
    }
}

/// Name-indexed measures. The defaults are `delta1`, `delta2`, `gamma1`, `gamma2`,
/// `kappa1`, `kappa2` and `alpha`.
#[derive(Clone)]
pub struct MeasureRegistry {
    entries: Vec<Arc<dyn Measure>>,
}

impl Default for MeasureRegistry {
    fn default() -> Self {
        let builtin = |name, needs_beta_prime, eval: Evaluator| -> Arc<dyn Measure> {
            Arc::new(Builtin {
                name,
                needs_beta_prime,
                eval,
            })
        };
        Self {
            entries: vec![
                builtin("delta1", false, |d, p| Ok(vec![dispersion(d, p)?.0])),
                builtin("delta2", false, |d, p| Ok(vec![dispersion(d, p)?.1])),
                builtin("gamma1", false, |d, p| Ok(vec![skewness(d, p)?.0])),
                builtin("gamma2", false, |d, p| Ok(skewness(d, p)?.1)),
                builtin("kappa1", true, |d, p| Ok(vec![kurtosis(d, p)?.0])),
                builtin("kappa2", true, |d, p| Ok(vec![kurtosis(d, p)?.1])),
                builtin("alpha", false, |d, p| Ok(vec![spherical_asymmetry(d, p)?])),
            ],
        }
    }
}

impl MeasureRegistry {
    pub fn register(&mut self, measure: Arc<dyn Measure>) {
        self.entries.retain(|m| m.name() != measure.name());
        self.entries.push(measure);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Measure>> {
        self.entries
            .iter()
            .find(|m| m.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: "measure",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|m| m.name()).collect()
    }
}
