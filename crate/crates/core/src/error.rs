use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Why a weight system could not be solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// A basis estimator has zero slope and zero bias: it is first-order identical to the mean.
    CollinearEstimators,
    /// Both slope entries vanish, so the optimum slope cannot be reached.
    ZeroSlopes,
    /// Slope and bias rows are proportional.
    DependentRows,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Degeneracy::CollinearEstimators => "collinear estimators",
            Degeneracy::ZeroSlopes => "zero slopes",
            Degeneracy::DependentRows => "dependent slope and bias rows",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid population summary: {0}")]
    InvalidSummary(String),

    #[error("invalid design constants: {0}")]
    InvalidConstants(String),

    #[error("missing population parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("census design (n = N): every design is degenerate and MSE is zero")]
    Census,

    #[error("attribute is constant across all records; point-biserial correlation is undefined")]
    DegenerateAttribute,

    #[error("need at least 2 records, got {0}")]
    TooFewRecords(usize),

    #[error("zero denominator in `{0}`")]
    ZeroDenominator(&'static str),

    #[error("`{0}` is not a real number at this design point")]
    Undefined(&'static str),

    #[error("proportion {value} for `{name}` is outside [0, 1]")]
    ProportionOutOfRange { name: &'static str, value: f64 },

    #[error("two-phase estimator requires a first-phase proportion p'")]
    MissingFirstPhase,

    #[error("combined estimator requires a weight vector")]
    MissingWeights,

    #[error("weights are only meaningful for combined estimators")]
    UnexpectedWeights,

    #[error("estimator `{0}` is not valid in this phase")]
    WrongPhase(&'static str),

    #[error("singular weight system ({degeneracy}); determinant {determinant:e}")]
    SingularSystem {
        determinant: f64,
        degeneracy: Degeneracy,
    },

    #[error("optimum slope K_p = {k_p} is unreachable: both slope entries are zero")]
    Infeasible { k_p: f64 },

    #[error("infeasible synthetic target: {reason}")]
    InfeasibleTarget { reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for input/output and decoding failures, as opposed to domain errors.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_)
        )
    }
}
