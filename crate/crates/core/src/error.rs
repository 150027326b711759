use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: u32, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("merge error: {0}")]
    Merge(String),

    #[error("timestep {timestep} outside scenario lifetime [{first}, {last}]")]
    Range { timestep: i64, first: i64, last: i64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{stage} `{name}` failed: {source}")]
    Component {
        stage: &'static str,
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("extractor `{name}` produced {actual} values per row, declared {declared}")]
    WidthMismatch { name: String, declared: usize, actual: usize },

    #[error("invalid sample file: {0}")]
    Format(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("checksum mismatch in {0}")]
    Checksum(PathBuf),

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn component(stage: &'static str, name: impl Into<String>, source: Error) -> Self {
        Error::Component { stage, name: name.into(), source: Box::new(source) }
    }

    pub(crate) fn in_scenario(scenario: impl Into<String>, source: Error) -> Self {
        Error::Scenario { scenario: scenario.into(), source: Box::new(source) }
    }
}
