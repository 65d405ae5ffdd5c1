use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("resonance pole: |4Ω² − ν²| = {gap:.3e} is too small (Ω = {omega}, ν = {nu})")]
    ResonancePole { omega: f64, nu: f64, gap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("series oracle did not converge within {terms} terms (last term {last:.3e})")]
    OracleDivergence { terms: usize, last: f64 },

    #[error("truncation not converged: n_max = {n_max} vs {n_max_doubled} differ by {sup_diff:.3e} in P_e")]
    Convergence {
        n_max: usize,
        n_max_doubled: usize,
        sup_diff: f64,
    },

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("model `{tag}`: {source}")]
    Model {
        tag: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable kind used on the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Precondition(_) => "precondition",
            Error::Config { .. } => "config",
            Error::ResonancePole { .. } => "resonance_pole",
            Error::Numerical(_) => "numerical",
            Error::OracleDivergence { .. } => "oracle",
            Error::Convergence { .. } => "convergence",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Model { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }

    /// Process exit status for the CLI: 2 for rejected input, 3 for numerical
    /// failures, 4 for file errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Model { source, .. } => source.exit_code(),
            Error::Precondition(_) | Error::Config { .. } | Error::ResonancePole { .. } => 2,
            Error::Numerical(_)
            | Error::OracleDivergence { .. }
            | Error::Convergence { .. }
            | Error::GridMismatch(_) => 3,
            Error::Io(_) | Error::Csv(_) => 4,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn with_model(self, tag: &'static str) -> Self {
        match self {
            e @ Error::Model { .. } => e,
            e => Error::Model {
                tag,
                source: Box::new(e),
            },
        }
    }
}
