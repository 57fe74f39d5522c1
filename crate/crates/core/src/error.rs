use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("quantile index must satisfy |u| < 1, got |u| = {0}")]
    IndexOutsideBall(f64),

    /// The sample lies on a single line in dimension >= 2, so quantiles need not be unique.
    #[error("sample support is contained in a single line; geometric quantiles are not unique")]
    SingleLineSupport,

    #[error("solver did not converge for direction {direction} (u = {u:?}) after {iterations} iterations")]
    NotConverged {
        direction: usize,
        u: Vec<f64>,
        iterations: usize,
    },

    /// Every antipodal quantile pair coincides, so dispersion is zero.
    #[error("degenerate dispersion: all antipodal quantile pairs coincide at beta = {beta}")]
    DegenerateDispersion { beta: f64 },

    /// Some directional quantile coincides with the median.
    #[error("degenerate radius: quantile for direction {direction} coincides with the median")]
    DegenerateRadius { direction: usize },

    #[error("singular sample covariance matrix")]
    SingularCovariance,

    #[error("univariate quantile dispersion is zero; skewness and kurtosis are undefined")]
    ZeroUnivariateDispersion,

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("bootstrap aborted: {redraws} redraws exceeded 10% of {replicates} replicates (last error: {last})")]
    TooManyRedraws {
        redraws: usize,
        replicates: usize,
        last: String,
    },

    #[error("experiment aborted: {retries} retries exceeded 5% of {sims} simulations (last error: {last})")]
    TooManyRetries {
        retries: usize,
        sims: usize,
        last: String,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::NonFinite { .. } => "non_finite",
            Error::IndexOutsideBall(_) => "index_outside_ball",
            Error::SingleLineSupport => "single_line_support",
            Error::NotConverged { .. } => "not_converged",
            Error::DegenerateDispersion { .. } => "degenerate_dispersion",
            Error::DegenerateRadius { .. } => "degenerate_radius",
            Error::SingularCovariance => "singular_covariance",
            Error::ZeroUnivariateDispersion => "zero_univariate_dispersion",
            Error::UnknownName { .. } => "unknown_name",
            Error::TooManyRedraws { .. } => "too_many_redraws",
            Error::TooManyRetries { .. } => "too_many_retries",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}
