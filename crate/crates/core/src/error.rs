use thiserror::Error;

use crate::rational::ParseRationalError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. Conditional and variable indices in
/// messages are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("conditioning sets {first} and {second} are identical: {set:?}")]
    DuplicateConditioningSet {
        first: usize,
        second: usize,
        set: Vec<usize>,
    },

    #[error("conditioning set {subset} {subset_set:?} is contained in conditioning set {superset} {superset_set:?}")]
    ContainmentViolation {
        subset: usize,
        superset: usize,
        subset_set: Vec<usize>,
        superset_set: Vec<usize>,
    },

    #[error("conditional {conditional} has an empty left-hand side (its conditioning set covers every variable)")]
    EmptyLeftSide { conditional: usize },

    #[error("problem has {columns} indeterminates, above the cap of {cap}")]
    SizeCapExceeded { columns: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid joint distribution: {0}")]
    InvalidDistribution(String),

    #[error(transparent)]
    Rational(#[from] ParseRationalError),

    #[error("matrix has {columns} columns, above the minor probe cap of {cap}")]
    ProbeCapExceeded { columns: usize, cap: usize },

    #[error("not a simple cycle: {0}")]
    NotACycle(String),

    #[error("walk does not alternate between cell vertices and slice vertices")]
    NotAlternating,

    #[error("circuit enumeration aborted after {found} circuits (cap {cap})")]
    CircuitCapExceeded { found: usize, cap: usize },

    #[error("circuit enumeration aborted: found an induced circuit longer than the cap of {cap}")]
    LengthCapExceeded { cap: usize },

    #[error("brute-force oracle refused a graph with {vertices} vertices (cap {cap})")]
    OracleCapExceeded { vertices: usize, cap: usize },

    #[error("ambiguous symmetry action: {0}")]
    AmbiguousAction(String),

    #[error("input conditionals are not compatible")]
    IncompatibleInput,

    #[error("expected {expected} component weights, got {got}")]
    WeightCountMismatch { expected: usize, got: usize },

    #[error("component weight {index} is not positive")]
    NonPositiveWeight { index: usize },

    #[error("deciders disagree: {0}")]
    DeciderDisagreement(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by a resource cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            Error::SizeCapExceeded { .. }
                | Error::ProbeCapExceeded { .. }
                | Error::CircuitCapExceeded { .. }
                | Error::LengthCapExceeded { .. }
                | Error::OracleCapExceeded { .. }
        )
    }
}
