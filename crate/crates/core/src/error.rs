use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate bivariate normal: |rho| = 1 has no density")]
    DegenerateDistribution,

    #[error("invalid cutoffs: {0}")]
    InvalidCutoffs(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("column `{column}` has zero variance")]
    ZeroVariance { column: String },

    #[error("column `{column}`: category {category} never observed")]
    EmptyCategory { column: String, category: usize },

    #[error("estimation failed for pair ({a}, {b}): {source}")]
    Pair {
        a: String,
        b: String,
        #[source]
        source: Box<Error>,
    },

    #[error("tetrad test undefined: {0}")]
    TestUndefined(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible model: {0}")]
    InfeasibleModel(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
