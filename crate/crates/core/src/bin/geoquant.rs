use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use geoquant::bootstrap::{bootstrap_region, coverage, CoverageSpec};
use geoquant::classical::classical_report;
use geoquant::distributions::{Characteristic, SimDistribution};
use geoquant::experiments::{contours, emit_svg, run_table, ExperimentSpec, TableId};
use geoquant::measures::{report, MeasureParams, MeasureRegistry};
use geoquant::solver::SolverRegistry;
use geoquant::{
    Dataset, DirectionKind, Error, QuantileIndex, QuantileSolver, Result, SolverConfig,
};

#[derive(Parser)]
#[command(
    name = "geoquant",
    version,
    about = "Geometric quantiles and quantile-based shape measures"
)]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Quantile solver strategy.
    #[arg(long, global = true, default_value = "newton")]
    solver: String,
    /// Solver step tolerance relative to the data scale.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// CSV file with one observation per row.
    #[arg(long)]
    input: PathBuf,
    /// The first CSV row is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct Directions {
    /// Number of directions.
    #[arg(long, default_value_t = 24)]
    k: usize,
    /// Direction construction.
    #[arg(long, default_value = "circle")]
    dirs: DirectionKind,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from a simulation distribution (CSV).
    Sample {
        #[arg(long)]
        characteristic: Characteristic,
        #[arg(long, default_value_t = 0)]
        nu: u8,
        #[arg(long, default_value_t = 300)]
        n: usize,
    },
    /// One geometric quantile (JSON).
    Quantile {
        #[command(flatten)]
        input: Input,
        /// Comma-separated index u with |u| < 1.
        #[arg(long, allow_hyphen_values = true)]
        u: String,
    },
    /// The quantile-based measures (JSON).
    Measures {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        directions: Directions,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Second level for the kurtosis ratios.
        #[arg(long)]
        beta_prime: Option<f64>,
    },
    /// Moment measures and per-coordinate quantile measures (JSON).
    Classical {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0.2)]
        beta: f64,
        #[arg(long, default_value_t = 0.8)]
        beta_prime: f64,
    },
    /// Bootstrap confidence ball for one measure (JSON).
    Bootstrap {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        directions: Directions,
        #[arg(long)]
        measure: String,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long)]
        beta_prime: Option<f64>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Bootstrap replicates.
        #[arg(long, alias = "T", default_value_t = 200)]
        replicates: usize,
    },
    /// Coverage of bootstrap balls over repeated samples (JSON).
    Coverage {
        #[command(flatten)]
        directions: Directions,
        #[arg(long)]
        measure: String,
        #[arg(long, default_value = "sphericity")]
        characteristic: Characteristic,
        #[arg(long, default_value_t = 2)]
        nu: u8,
        /// Comma-separated true value of the measure.
        #[arg(long, allow_hyphen_values = true)]
        truth: String,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long)]
        beta_prime: Option<f64>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, alias = "T", default_value_t = 200)]
        replicates: usize,
    },
    /// Monte Carlo table (JSON, or CSV with --csv).
    Table {
        table: TableId,
        #[arg(long)]
        sims: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        csv: bool,
    },
    /// Isoquantile contours of the nu = 0, 1, 2 distributions (CSV, plus SVG with --svg).
    Contours {
        #[arg(long, default_value = "dispersion")]
        characteristic: Characteristic,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 24)]
        k: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct QuantileOutput {
    u: Vec<f64>,
    p: Vec<f64>,
    iterations: usize,
    converged: bool,
    residual: f64,
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("not a number: `{t}`")))
        })
        .collect()
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn measure_params(
    data: &Dataset,
    directions: &Directions,
    beta: f64,
    beta_prime: Option<f64>,
    seed: u64,
    solver: SolverConfig,
    strategy: std::sync::Arc<dyn QuantileSolver>,
) -> Result<MeasureParams> {
    let dirs = directions.dirs.build(data.dim(), directions.k, seed)?;
    Ok(MeasureParams::new(beta, beta_prime, dirs)?
        .with_solver(solver)
        .with_strategy(strategy))
}

fn run(cli: Cli) -> Result<()> {
    let solver = SolverConfig {
        tol: cli.tol,
        ..SolverConfig::default()
    };
    solver.validate()?;
    let strategy = SolverRegistry::default().get(&cli.solver)?;
    let out = cli.out.as_deref();
    let seed = cli.seed;

    let text = match cli.command {
        Command::Sample {
            characteristic,
            nu,
            n,
        } => {
            let data = SimDistribution::new(characteristic, nu)?.sample(n, seed)?;
            let mut buf = Vec::new();
            data.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Command::Quantile { input, u } => {
            let data = Dataset::read_csv_path(&input.input, input.header)?;
            let index = QuantileIndex::new(parse_vector(&u)?)?;
            let q = strategy.solve(&data, &index, &solver)?;
            let residual = if data.dim() >= 2 {
                geoquant::solver::first_order_residual(&data, &index, &q.p)?
            } else {
                0.0
            };
            json(&QuantileOutput {
                u: index.as_slice().to_vec(),
                p: q.p,
                iterations: q.iterations,
                converged: q.converged,
                residual,
            })?
        }
        Command::Measures {
            input,
            directions,
            beta,
            beta_prime,
        } => {
            let data = Dataset::read_csv_path(&input.input, input.header)?;
            let params =
                measure_params(&data, &directions, beta, beta_prime, seed, solver, strategy)?;
            json(&report(&data, &params)?)?
        }
        Command::Classical {
            input,
            beta,
            beta_prime,
        } => {
            let data = Dataset::read_csv_path(&input.input, input.header)?;
            json(&classical_report(&data, beta, beta_prime)?)?
        }
        Command::Bootstrap {
            input,
            directions,
            measure,
            beta,
            beta_prime,
            level,
            replicates,
        } => {
            let data = Dataset::read_csv_path(&input.input, input.header)?;
            let params =
                measure_params(&data, &directions, beta, beta_prime, seed, solver, strategy)?;
            let m = MeasureRegistry::default().get(&measure)?;
            json(&bootstrap_region(
                &data,
                m.as_ref(),
                &params,
                level,
                replicates,
                seed,
            )?)?
        }
        Command::Coverage {
            directions,
            measure,
            characteristic,
            nu,
            truth,
            beta,
            beta_prime,
            level,
            reps,
            n,
            replicates,
        } => {
            let dirs = directions.dirs.build(2, directions.k, seed)?;
            let params = MeasureParams::new(beta, beta_prime, dirs)?
                .with_solver(solver)
                .with_strategy(strategy);
            let m = MeasureRegistry::default().get(&measure)?;
            let spec = CoverageSpec {
                distribution: SimDistribution::new(characteristic, nu)?,
                truth: parse_vector(&truth)?,
                reps,
                sample_size: n,
                replicates,
                level,
                base_seed: seed,
            };
            json(&coverage(m.as_ref(), &params, &spec)?)?
        }
        Command::Table {
            table,
            sims,
            n,
            k,
            beta,
            csv,
        } => {
            let mut spec = ExperimentSpec::new(table);
            spec.sims = sims.unwrap_or(spec.sims);
            spec.sample_size = n.unwrap_or(spec.sample_size);
            spec.k = k.unwrap_or(spec.k);
            spec.beta = beta.unwrap_or(spec.beta);
            spec.base_seed = seed;
            spec.solver = solver;
            spec.strategy = strategy;
            let r = run_table(&spec)?;
            eprint!("{r}");
            if csv {
                r.to_csv()
            } else {
                json(&r)?
            }
        }
        Command::Contours {
            characteristic,
            n,
            beta,
            k,
            svg,
        } => {
            let dists = (0..3)
                .map(|nu| SimDistribution::new(characteristic, nu))
                .collect::<Result<Vec<_>>>()?;
            let artifact = contours(&dists, n, beta, k, seed)?;
            if let Some(path) = svg {
                emit_svg(&artifact, &path)?;
            }
            artifact.to_csv()
        }
    };
    write_output(out, &text)
}

#[derive(Serialize)]
struct ErrorOutput<'a> {
    error: &'a str,
    message: String,
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    let body = serde_json::to_string(&ErrorOutput {
        error: kind,
        message,
    })
    .unwrap_or_default();
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim().to_string(), 2),
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            return fail("invalid_input", e.to_string(), 1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string(), 1),
    }
}
