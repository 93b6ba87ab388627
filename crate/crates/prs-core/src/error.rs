//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A dense allocation would exceed the desk-scale caps.
    #[error("capacity exceeded: {what} requires {requested}, cap is {cap}")]
    CapacityExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    /// An exhaustive enumeration would exceed its budget.
    #[error("budget exceeded: {what} requires {requested}, budget is {budget}; {hint}")]
    BudgetExceeded {
        what: &'static str,
        requested: u128,
        budget: u128,
        hint: &'static str,
    },

    #[error("matrix is not Hermitian: max |M - M*| entry = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary: max |U*U - I| entry = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator trace is {trace:.12}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("input {value} outside domain of size {domain}")]
    DomainViolation { value: u64, domain: u64 },

    #[error("Feistel width must be even, got {bits} bits")]
    OddBits { bits: u32 },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Capacity and budget violations map to a dedicated process exit code.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            Error::CapacityExceeded { .. } | Error::BudgetExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
