use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} ({left} vs {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("empty subsystem selection")]
    EmptySubsystemSelection,

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("observable is not dichotomic (A^2 deviates from I by {deviation:.3e})")]
    NotDichotomic { deviation: f64 },

    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid outcome {value} for {name}")]
    InvalidOutcome { name: &'static str, value: usize },

    #[error(
        "numeric invariant violated: {check} deviation {deviation:.3e} exceeds {tolerance:.1e}"
    )]
    Hygiene {
        check: &'static str,
        deviation: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
