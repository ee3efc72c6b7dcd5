use thiserror::Error;

use crate::incidence::Violation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IncidenceError {
    #[error("row {row} has {found} labels, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("{lines} rows but {points} distinct point labels")]
    PointCount { lines: usize, points: usize },
    #[error("expected {expected} lines, found {found}")]
    LineCount { expected: usize, found: usize },
    #[error("line {line} has {size} points")]
    LineSize { line: usize, size: usize },
    #[error("line {line} references point {point} out of range")]
    PointOutOfRange { line: usize, point: usize },
    #[error("line {line} lists point {point} twice")]
    DuplicatePointInLine { line: usize, point: usize },
    #[error("point {point} lies on {degree} lines")]
    RegularityViolation { point: usize, degree: usize },
    #[error("lines {first} and {second} meet more than once")]
    SharedPairViolation { first: usize, second: usize },
    #[error("incidence graph is disconnected")]
    Disconnected,
}

impl From<Violation> for IncidenceError {
    fn from(v: Violation) -> Self {
        match v {
            Violation::LineCount { expected, found } => IncidenceError::LineCount { expected, found },
            Violation::LineSize { line, size } => IncidenceError::LineSize { line, size },
            Violation::PointOutOfRange { line, point } => IncidenceError::PointOutOfRange { line, point },
            Violation::DuplicatePointInLine { line, point } => {
                IncidenceError::DuplicatePointInLine { line, point }
            }
            Violation::Regularity { point, degree } => {
                IncidenceError::RegularityViolation { point, degree }
            }
            Violation::SharedPair { first, second } => {
                IncidenceError::SharedPairViolation { first, second }
            }
            Violation::Disconnected => IncidenceError::Disconnected,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("tuple {0:?} is not in the partition table")]
    NotInTable(Vec<usize>),
    #[error("no partition table: n - 1 - k(k-1) is negative for n={n}, k={k}")]
    NegativeTotal { n: usize, k: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SweepError {
    #[error("base-line tuple {0:?} is not its own maximal representative")]
    LambdaNotMaximal(Vec<usize>),
    #[error("parameters n={n}, k={k} leave no working k-crossings")]
    BadParameters { n: usize, k: usize },
    #[error("closure infeasible: {0}")]
    InfeasibleClosure(String),
    #[error("a pseudoline's segment distribution precedes the base line in the table")]
    CanonicityReject,
    #[error("history replay failed at event {index}: {reason}")]
    Replay { index: usize, reason: String },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("mixed parameters: expected ({n},{k}), found ({found_n},{found_k})")]
    MixedParameters { n: usize, k: usize, found_n: usize, found_k: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle enumeration for n={n}, k={k} is outside the supported range")]
    BudgetExceeded { n: usize, k: usize },
    #[error("homogeneous vector {0} is zero")]
    ZeroVector(usize),
    #[error("expected {expected} vectors, found {found}")]
    VectorCount { expected: usize, found: usize },
    #[error("replay mismatch at event {index}: {reason}")]
    ReplayMismatch { index: usize, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DrawError {
    #[error("record has no sweep history to draw")]
    MissingHistory,
    #[error(transparent)]
    Sweep(#[from] SweepError),
}
