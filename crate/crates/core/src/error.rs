use std::fmt;

use thiserror::Error;

/// A cell of an interaction grid: the target values, in target order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CellSupport {
    pub cell: Vec<u8>,
    pub support: f64,
}

impl fmt::Display for CellSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.cell.iter().map(|v| v.to_string()).collect();
        // counts derived by subtraction can come out as -0
        write!(f, "({})={}", vals.join(","), self.support + 0.0)
    }
}

fn list(cells: &[CellSupport]) -> String {
    cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: String, message: String },

    #[error("value {value} out of range for variable '{variable}' at row {row}")]
    OutOfRange { variable: String, row: usize, value: String },

    #[error("duplicate variable name '{0}'")]
    DuplicateName(String),

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("spin value {value} at row {row}, column {column} is not -1 or +1")]
    InvalidSpin { row: usize, column: usize, value: i64 },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid target specification: {0}")]
    InvalidSpec(String),

    #[error("insufficient support (< {min}) in cells {}", list(.cells))]
    InsufficientSupport { min: f64, cells: Vec<CellSupport> },

    #[error("empty cells {}; interaction undefined", list(.cells))]
    ZeroCell { cells: Vec<CellSupport> },

    #[error("conditional mean {mean} is degenerate in cell {cell:?}")]
    DegenerateMean { cell: Vec<u8>, mean: f64 },

    #[error("no coupling conversion factor for order {0}")]
    UnsupportedOrder(usize),

    #[error("all {replicates} bootstrap replicates failed")]
    AllReplicatesFailed { replicates: usize },

    #[error("no stratum passes the expected-count floor")]
    NoUsableStrata,

    #[error("{sites} variables exceed the enumeration limit of {limit}")]
    SizeLimit { sites: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad packed file: {0}")]
    Format(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let row = e.position().map(|p| p.record() as usize).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse { row, column: String::new(), message: format!("{other:?}") },
        }
    }
}

impl Error {
    /// Errors that come from thin data rather than from misuse.
    pub fn is_estimation_failure(&self) -> bool {
        matches!(
            self,
            Error::InsufficientSupport { .. }
                | Error::ZeroCell { .. }
                | Error::DegenerateMean { .. }
                | Error::NoUsableStrata
        )
    }
}
