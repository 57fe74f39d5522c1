//! Monte Carlo reproduction of the simulation tables.
//!
//! Every table column is one statistic evaluated on the distributions of one
//! characteristic at levels `nu = 0, 1, 2`. Simulation `s` samples with seed
//! `base_seed + s`; a simulation whose statistic fails is retried with seed
//! `base_seed + s + a * sims` on attempt `a`. Reported standard errors are the standard
//! deviation of the per-simulation estimates divided by `sqrt(sims)`.

mod contours;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{
    frechet_variance, mardia_kurtosis, mardia_skewness, univariate_dispersion_skewness,
    univariate_quantile_measures,
};
use crate::data::{norm, Dataset};
use crate::directions::DirectionSet;
use crate::distributions::{Characteristic, SimDistribution};
use crate::error::{Error, Result};
use crate::measures::{MeasureParams, SolvedQuantiles};
use crate::solver::{default_solver, QuantileSolver, SolverConfig};

pub use contours::{contours, emit_svg, render_svg, Contour, ContourArtifact};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
}

impl TableId {
    pub const ALL: [TableId; 7] = [
        TableId::T1,
        TableId::T2,
        TableId::T3,
        TableId::T4,
        TableId::T5,
        TableId::T6,
        TableId::T7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TableId::T1 => "t1",
            TableId::T2 => "t2",
            TableId::T3 => "t3",
            TableId::T4 => "t4",
            TableId::T5 => "t5",
            TableId::T6 => "t6",
            TableId::T7 => "t7",
        }
    }

    fn extreme(self) -> bool {
        matches!(self, TableId::T4 | TableId::T5 | TableId::T7)
    }

    pub fn columns(self) -> Vec<Column> {
        use Characteristic::*;
        use Statistic::*;
        let col = |name: &'static str, characteristic, statistic, monotone| Column {
            name,
            characteristic,
            statistic,
            monotone,
            aggregate: Aggregate::Mean,
        };
        // signed per simulation; the table lists the magnitude of the average
        let abs_mean = |name: &'static str, j| Column {
            name,
            characteristic: Skewness,
            statistic: Gamma0(j),
            monotone: true,
            aggregate: Aggregate::AbsMean,
        };
        match self {
            TableId::T1 => vec![
                col("frechet_variance", Dispersion, Frechet, true),
                col("mardia_skewness", Skewness, MardiaSkewness, true),
                col("mardia_kurtosis", Kurtosis, MardiaKurtosis, true),
            ],
            // v1 of the dispersion distributions does not change with nu
            TableId::T2 | TableId::T4 => vec![
                col("delta0_v1", Dispersion, Delta0(0), false),
                col("delta0_v2", Dispersion, Delta0(1), true),
                abs_mean("abs_gamma0_v1", 0),
                abs_mean("abs_gamma0_v2", 1),
                col("kappa0_v1", Kurtosis, Kappa0(0), true),
                col("kappa0_v2", Kurtosis, Kappa0(1), true),
            ],
            _ => vec![
                col("delta1", Dispersion, Delta1, true),
                col("delta2", Dispersion, Delta2, true),
                col("gamma1", Skewness, Gamma1, true),
                col("gamma2_norm", Skewness, Gamma2Norm, true),
                col("kappa1", Kurtosis, Kappa1, true),
                col("kappa2", Kurtosis, Kappa2, true),
                col("alpha", Sphericity, Alpha, true),
            ],
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "table",
                name: s.to_string(),
            })
    }
}

/// What a column computes on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Frechet,
    MardiaSkewness,
    MardiaKurtosis,
    Delta0(usize),
    Gamma0(usize),
    Kappa0(usize),
    Delta1,
    Delta2,
    Gamma1,
    Gamma2Norm,
    Kappa1,
    Kappa2,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: &'static str,
    pub characteristic: Characteristic,
    pub statistic: Statistic,
    /// Whether the reported value is expected to decrease strictly with `nu`.
    pub monotone: bool,
    pub aggregate: Aggregate,
}

/// How per-simulation values become a table cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Mean,
    /// Magnitude of the mean of a signed statistic; the SE is that of the signed mean.
    AbsMean,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub table: TableId,
    pub sims: usize,
    pub sample_size: usize,
    pub k: usize,
    /// Level for dispersion, skewness and asymmetry columns.
    pub beta: f64,
    /// `(beta, beta')` for the kurtosis columns.
    pub kurtosis_betas: (f64, f64),
    pub base_seed: u64,
    pub solver: SolverConfig,
    #[serde(skip, default = "default_solver")]
    pub strategy: Arc<dyn QuantileSolver>,
}

impl fmt::Debug for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExperimentSpec")
            .field("table", &self.table)
            .field("sims", &self.sims)
            .field("sample_size", &self.sample_size)
            .field("k", &self.k)
            .field("beta", &self.beta)
            .field("kurtosis_betas", &self.kurtosis_betas)
            .field("base_seed", &self.base_seed)
            .field("strategy", &self.strategy.name())
            .finish()
    }
}

impl ExperimentSpec {
    /// Desk-scale defaults: 100 simulations of 300 observations; `k = 72` for t6 and t7,
    /// `24` otherwise; `beta = 0.98` and `(0.2, 0.98)` for t4, t5, t7, else `0.5` and
    /// `(0.2, 0.8)`.
    pub fn new(table: TableId) -> Self {
        let extreme = table.extreme();
        Self {
            table,
            sims: 100,
            sample_size: 300,
            k: if matches!(table, TableId::T6 | TableId::T7) {
                72
            } else {
                24
            },
            beta: if extreme { 0.98 } else { 0.5 },
            kurtosis_betas: (0.2, if extreme { 0.98 } else { 0.8 }),
            base_seed: 0,
            solver: SolverConfig::default(),
            strategy: default_solver(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sims == 0 {
            return Err(Error::InvalidInput("sims must be at least 1".into()));
        }
        if self.sample_size < 2 {
            return Err(Error::InvalidInput("sample size must be at least 2".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        let (b, bp) = self.kurtosis_betas;
        if !(self.beta > 0.0 && self.beta < 1.0 && b > 0.0 && b < bp && bp < 1.0) {
            return Err(Error::InvalidInput("invalid quantile levels".into()));
        }
        self.solver.validate()
    }

    fn params(&self, beta: f64, beta_prime: Option<f64>) -> Result<MeasureParams> {
        Ok(
            MeasureParams::new(beta, beta_prime, DirectionSet::circle_grid(self.k)?)?
                .with_solver(self.solver)
                .with_strategy(self.strategy.clone()),
        )
    }
}

/// Mean and standard error of one column at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub nu: u8,
    pub mean: f64,
    pub se: f64,
    pub sims: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub characteristic: Characteristic,
    pub monotone_expected: bool,
    pub strictly_decreasing: bool,
    pub cells: Vec<Cell>,
}

impl ColumnSummary {
    pub fn cell(&self, nu: u8) -> &Cell {
        &self.cells[nu as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: TableId,
    pub sims: usize,
    pub sample_size: usize,
    pub k: usize,
    pub beta: f64,
    pub kurtosis_betas: (f64, f64),
    pub base_seed: u64,
    pub retries: usize,
    pub columns: Vec<ColumnSummary>,
}

impl TableReport {
    pub fn column(&self, name: &str) -> Option<&ColumnSummary> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Every column expected to be monotone is strictly decreasing in `nu`.
    pub fn monotone_ok(&self) -> bool {
        self.columns
            .iter()
            .all(|c| !c.monotone_expected || c.strictly_decreasing)
    }

    /// `column,nu,mean,se,sims` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("column,nu,mean,se,sims\n");
        for c in &self.columns {
            for cell in &c.cells {
                out.push_str(&format!(
                    "{},{},{:?},{:?},{}\n",
                    c.name, cell.nu, cell.mean, cell.se, cell.sims
                ));
            }
        }
        out
    }
}

impl fmt::Display for TableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} (sims = {}, N = {}, k = {}, beta = {}, kurtosis betas = {:?})",
            self.table, self.sims, self.sample_size, self.k, self.beta, self.kurtosis_betas
        )?;
        write!(f, "{:>4}", "nu")?;
        for c in &self.columns {
            write!(f, " {:>22}", c.name)?;
        }
        writeln!(f)?;
        for nu in 0..3u8 {
            write!(f, "{nu:>4}")?;
            for c in &self.columns {
                let cell = c.cell(nu);
                write!(f, " {:>12.5} ({:>7.5})", cell.mean, cell.se)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Statistics of the columns sharing one characteristic, from one sample.
fn evaluate(spec: &ExperimentSpec, columns: &[Column], data: &Dataset) -> Result<Vec<f64>> {
    let needs = |f: fn(Statistic) -> bool| columns.iter().any(|c| f(c.statistic));
    let quantile_betas = if needs(|s| matches!(s, Statistic::Kappa1 | Statistic::Kappa2)) {
        Some(vec![spec.kurtosis_betas.0, spec.kurtosis_betas.1])
    } else if needs(|s| {
        matches!(
            s,
            Statistic::Delta1
                | Statistic::Delta2
                | Statistic::Gamma1
                | Statistic::Gamma2Norm
                | Statistic::Alpha
        )
    }) {
        Some(vec![spec.beta])
    } else {
        None
    };
    let solved = match quantile_betas {
        Some(betas) => {
            let params = spec.params(betas[0], betas.get(1).copied())?;
            let with_median = needs(|s| {
                matches!(
                    s,
                    Statistic::Gamma1 | Statistic::Gamma2Norm | Statistic::Alpha
                )
            });
            Some(SolvedQuantiles::compute(
                data,
                &params,
                &betas,
                with_median,
            )?)
        }
        None => None,
    };
    let solved = || {
        solved
            .as_ref()
            .expect("quantiles solved for geometric columns")
    };

    columns
        .iter()
        .map(|c| {
            Ok(match c.statistic {
                Statistic::Frechet => frechet_variance(data),
                Statistic::MardiaSkewness => mardia_skewness(data)?,
                Statistic::MardiaKurtosis => mardia_kurtosis(data)?,
                Statistic::Delta0(j) => {
                    univariate_dispersion_skewness(&data.column(j), spec.beta)?.0
                }
                Statistic::Gamma0(j) => {
                    univariate_dispersion_skewness(&data.column(j), spec.beta)?.1
                }
                Statistic::Kappa0(j) => {
                    let (b, bp) = spec.kurtosis_betas;
                    univariate_quantile_measures(&data.column(j), b, bp)?.kappa0
                }
                Statistic::Delta1 => solved().dispersion(0).0,
                Statistic::Delta2 => solved().dispersion(0).1,
                Statistic::Gamma1 => solved().skewness(0)?.0,
                Statistic::Gamma2Norm => norm(&solved().skewness(0)?.1),
                Statistic::Kappa1 | Statistic::Kappa2 => {
                    let (l1, l2) = solved().dispersion(0);
                    let (h1, h2) = solved().dispersion(1);
                    if l1 <= solved().threshold {
                        return Err(Error::DegenerateDispersion {
                            beta: spec.kurtosis_betas.0,
                        });
                    }
                    if c.statistic == Statistic::Kappa1 {
                        h1 / l1
                    } else {
                        h2 / l2
                    }
                }
                Statistic::Alpha => solved().spherical_asymmetry(0)?,
            })
        })
        .collect()
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs one table.
pub fn run_table(spec: &ExperimentSpec) -> Result<TableReport> {
    spec.validate()?;
    let columns = spec.table.columns();
    let mut characteristics: Vec<Characteristic> = Vec::new();
    for c in &columns {
        if !characteristics.contains(&c.characteristic) {
            characteristics.push(c.characteristic);
        }
    }
    let max_attempts = spec.sims / 20 + 1;

    let jobs: Vec<(Characteristic, u8, usize)> = characteristics
        .iter()
        .flat_map(|&ch| (0..3u8).flat_map(move |nu| (0..spec.sims).map(move |s| (ch, nu, s))))
        .collect();
    let results: Vec<(Result<Vec<f64>>, usize)> = jobs
        .par_iter()
        .map(|&(ch, nu, s)| {
            let group: Vec<Column> = columns
                .iter()
                .copied()
                .filter(|c| c.characteristic == ch)
                .collect();
            let dist = SimDistribution {
                characteristic: ch,
                nu,
            };
            let mut attempt = 0usize;
            loop {
                let seed = spec
                    .base_seed
                    .wrapping_add(s as u64)
                    .wrapping_add((attempt * spec.sims) as u64);
                let outcome = dist
                    .sample(spec.sample_size, seed)
                    .and_then(|d| evaluate(spec, &group, &d));
                match outcome {
                    Ok(v) => return (Ok(v), attempt),
                    Err(e) if attempt >= max_attempts => return (Err(e), attempt),
                    Err(_) => attempt += 1,
                }
            }
        })
        .collect();

    let retries: usize = results.iter().map(|(_, a)| a).sum();
    let budget = jobs.len() / 20;
    if let Some((Err(e), _)) = results.iter().find(|(r, _)| r.is_err()) {
        return Err(Error::TooManyRetries {
            retries,
            sims: jobs.len(),
            last: e.to_string(),
        });
    }
    if retries > budget {
        return Err(Error::TooManyRetries {
            retries,
            sims: jobs.len(),
            last: String::new(),
        });
    }

    let mut summaries = Vec::with_capacity(columns.len());
    for c in &columns {
        let group_pos = columns
            .iter()
            .filter(|o| o.characteristic == c.characteristic)
            .position(|o| o.name == c.name)
            .expect("column belongs to its group");
        let cells: Vec<Cell> = (0..3u8)
            .map(|nu| {
                let values: Vec<f64> = jobs
                    .iter()
                    .zip(&results)
                    .filter(|((ch, n, _), _)| *ch == c.characteristic && *n == nu)
                    .map(|(_, (r, _))| r.as_ref().expect("checked above")[group_pos])
                    .collect();
                let (mean, se) = mean_se(&values);
                let mean = match c.aggregate {
                    Aggregate::Mean => mean,
                    Aggregate::AbsMean => mean.abs(),
                };
                Cell {
                    nu,
                    mean,
                    se,
                    sims: values.len(),
                }
            })
            .collect();
        let strictly_decreasing = cells.windows(2).all(|w| w[1].mean < w[0].mean);
        summaries.push(ColumnSummary {
            name: c.name.to_string(),
            characteristic: c.characteristic,
            monotone_expected: c.monotone,
            strictly_decreasing,
            cells,
        });
    }
    Ok(TableReport {
        table: spec.table,
        sims: spec.sims,
        sample_size: spec.sample_size,
        k: spec.k,
        beta: spec.beta,
        kurtosis_betas: spec.kurtosis_betas,
        base_seed: spec.base_seed,
        retries,
        columns: summaries,
    })
}
