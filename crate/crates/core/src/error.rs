use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid harmonic index: degree {degree}, order {order}")]
    Index { degree: usize, order: i64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("covariance of {required} rows exceeds the cap of {cap} rows")]
    CapExceeded { required: usize, cap: usize },

    #[error("matrix is not positive semidefinite: factorization failed at relative jitter {max_jitter:e}")]
    NotPositiveSemidefinite { max_jitter: f64 },

    #[error("singular anchor configuration: condition number {condition:e} exceeds {limit:e}")]
    SingularConfiguration { condition: f64, limit: f64 },

    #[error("regression design is rank deficient: condition number {condition:e}")]
    RankDeficient { condition: f64 },

    #[error("time series too short: {len} time points, need at least {needed}")]
    TooShort { len: usize, needed: usize },

    #[error("every bin of the moment table is empty")]
    EmptyTable,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("field is not a complete location x time rectangle; missing cells: {}", format_cells(.missing))]
    IncompleteRectangle { missing: Vec<(u64, i64)> },

    #[error("duplicate cell for location {location_id} at t = {t} (line {line})")]
    DuplicateCell { location_id: u64, t: i64, line: u64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("linear algebra failure: {0}")]
    Numeric(String),
}

fn format_cells(cells: &[(u64, i64)]) -> String {
    cells
        .iter()
        .map(|(id, t)| format!("(location {id}, t {t})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotPositiveSemidefinite { .. }
            | Error::SingularConfiguration { .. }
            | Error::RankDeficient { .. }
            | Error::EmptyTable
            | Error::Precondition(_)
            | Error::Numeric(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
