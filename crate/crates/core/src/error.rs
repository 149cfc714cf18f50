use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed image file: {0}")]
    MalformedImage(String),
    #[error("image cannot be written: {0}")]
    InvalidImage(String),
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("scene parse error at line {line}, column {column} (field `{field}`): {message}")]
    SceneParse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("unknown builtin scene `{0}` (expected cornell-basic, cornell-caustic or veach-lamp)")]
    UnknownScene(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
