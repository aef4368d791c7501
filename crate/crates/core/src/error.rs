use thiserror::Error;

use crate::exponent::TrivialCorner;

/// Errors produced by channel construction and the tradeoff engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("parameter `{param}` out of range: {msg}")]
    Domain { param: String, msg: String },

    /// A row of a conditional matrix is not a probability vector.
    #[error("row {row} of `{matrix}` is not a probability vector: {msg}")]
    NotStochastic {
        matrix: String,
        row: usize,
        msg: String,
    },

    /// One state assigns zero probability where the other does not.
    #[error("support mismatch at {}: likelihoods must be positive under both states or neither", fmt_cells(.cells))]
    SupportMismatch { cells: Vec<(usize, usize)> },

    /// Quantization produced cells that vanish under one state only.
    #[error("quantization failed: {0}")]
    Quantization(String),

    /// Threshold lies outside the nontrivial range; the test degenerates to a trivial corner.
    #[error("threshold {tau} outside ({lo}, {hi}); the test degenerates to the {corner} corner")]
    ThresholdRange {
        tau: f64,
        lo: f64,
        hi: f64,
        corner: TrivialCorner,
    },

    /// Matrix or vector shapes are inconsistent.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Caller supplied inconsistent or empty inputs.
    #[error("usage: {0}")]
    Usage(String),

    /// The two states cannot be told apart.
    #[error("degenerate channel: {0}")]
    Degenerate(String),

    /// Malformed channel configuration document.
    #[error("config: {0}")]
    Config(String),
}

fn fmt_cells(cells: &[(usize, usize)]) -> String {
    let shown: Vec<String> = cells
        .iter()
        .take(8)
        .map(|(x, y)| format!("(x={x}, y={y})"))
        .collect();
    if cells.len() > 8 {
        format!("{} and {} more", shown.join(", "), cells.len() - 8)
    } else {
        shown.join(", ")
    }
}

impl Error {
    pub fn domain(param: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Domain {
            param: param.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
