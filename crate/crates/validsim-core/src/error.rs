//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the sampler, estimators, harness and
/// decision-utility calculations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A matrix failed a structural invariant (shape, symmetry, entry range).
    #[error("invalid matrix: {reason}")]
    InvalidMatrix { reason: String },

    /// Gram factorization hit a pivot below the semidefiniteness tolerance.
    #[error("matrix is not positive semidefinite: pivot {pivot:.3e} at column {col}")]
    NotPositiveSemidefinite { col: usize, pivot: f64 },

    /// Inversion failed; the variable set is perfectly collinear.
    #[error("matrix is singular: pivot {pivot:.3e} at column {col}")]
    SingularMatrix { col: usize, pivot: f64 },

    /// A column has (numerically) zero variance, so correlations are undefined.
    #[error("column {col} is constant; correlation undefined")]
    DegenerateColumn { col: usize },

    /// Too few observations for the requested statistic.
    #[error("{rows} rows given, at least {min} required")]
    TooFewRows { rows: usize, min: usize },

    /// Too few variables for the requested statistic.
    #[error("{cols} columns given, at least {min} required")]
    TooFewColumns { cols: usize, min: usize },

    /// The requested partition does not tile the sample.
    #[error("cannot split {rows} rows into {nss} sub-samples of size {sss}")]
    SizeMismatch { rows: usize, nss: usize, sss: usize },

    /// An operation received an empty collection.
    #[error("empty input: {what}")]
    EmptyInput { what: &'static str },

    /// Two parallel collections disagree in length.
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A scalar argument fell outside its documented domain.
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    /// Shrinkage adjustment requires n > k + 1.
    #[error("degrees of freedom exhausted: n = {n}, k = {k} requires n > k + 1")]
    DegreesOfFreedomExhausted { n: usize, k: usize },

    /// Standard-deviation ratio for a range-restriction correction must be positive.
    #[error("standard-deviation ratio must be positive and finite, got {ratio}")]
    InvalidRatio { ratio: f64 },

    /// Base rate or quota at the boundary leaves the fourfold table undefined.
    #[error("{what} must lie strictly inside (0, 1), got {value}")]
    DegenerateRate { what: &'static str, value: f64 },

    /// Hit rate is undefined when the positive base rate is zero.
    #[error("hit rate undefined: positive base rate is zero")]
    ZeroBaseRate,

    /// A fourfold table failed its invariants (negative cell or bad total).
    #[error("invalid fourfold table: {reason}")]
    InvalidTable { reason: String },

    /// A simulation design failed validation.
    #[error("invalid simulation design: {reason}")]
    InvalidDesign { reason: String },

    /// A replication kept producing singular sub-sample correlation matrices.
    #[error("replication {replication} produced singular sub-samples in {attempts} attempts")]
    SingularSubsample { replication: usize, attempts: usize },

    /// Bias tables require every design in a set to share one population matrix.
    #[error("designs in one bias table must share the population correlation matrix")]
    MismatchedSigma,
}
