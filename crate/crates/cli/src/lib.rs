//! Library surface of the command-line tool: input file schemas and output
//! rendering, exposed separately so the parsers can be exercised directly
//! (for instance by fuzz targets).

pub mod input;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] infodiag::Error),
}
