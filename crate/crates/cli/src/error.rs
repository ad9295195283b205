use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: at `{path}`: {message}")]
    Config { origin: String, line: usize, column: usize, path: String, message: String },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("{}: {1}", .0.display())]
    Io(PathBuf, std::io::Error),

    #[error(transparent)]
    Compute(#[from] chaosbench::Error),

    #[error("cannot serialise output: {0}")]
    Json(#[from] serde_json::Error),
}
