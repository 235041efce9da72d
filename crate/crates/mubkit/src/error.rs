use thiserror::Error;

/// Errors raised by construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("{value} is not prime")]
    NotPrime { value: usize },

    #[error("square side must be at least 2, got {side}")]
    SideTooSmall { side: usize },

    #[error("square sides differ: {left} vs {right}")]
    SideMismatch { left: usize, right: usize },

    #[error("array of side {side} is not a valid {kind} square: {reason}")]
    InvalidSquare { side: usize, kind: String, reason: String },

    #[error("norm drifted by {drift:.3e}, beyond tolerance")]
    NormalizationDrift { drift: f64 },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("not a valid density operator: {reason}")]
    InvalidDensity { reason: String },

    #[error("basis vectors are not orthonormal (defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("bases {t1} and {t2} are not mutually unbiased (deviation {deviation:.3e})")]
    NotUnbiased { t1: usize, t2: usize, deviation: f64 },

    #[error("operation requires family {expected}, set has family {found}")]
    FamilyMismatch { expected: String, found: String },

    #[error("Pauli exponent {value} out of range for p = {p}")]
    ExponentOutOfRange { value: u32, p: usize },

    #[error("no basis vector matches the Pauli image of vector {k} in basis {t} (best fidelity {best:.6})")]
    NoPermutationMatch { t: usize, k: usize, best: f64 },

    #[error("POVM is incomplete (defect {defect:.3e})")]
    PovmIncomplete { defect: f64 },

    #[error("prior is invalid: {reason}")]
    InvalidPrior { reason: String },

    #[error("prior shape ({rows}, {cols}) does not match ensemble shape ({m}, {d})")]
    PriorShapeMismatch { rows: usize, cols: usize, m: usize, d: usize },

    #[error("prior is not uniform (entropy {prior_entropy:.6} bits)")]
    NonUniformPrior { prior_entropy: f64 },

    #[error("Bell basis requires an even number of qubits, got {n}")]
    OddQubitCount { n: usize },

    #[error("dimension must be at least {min}, got {found}")]
    DimensionTooSmall { min: usize, found: usize },

    #[error("set must contain at least {min} bases, got {found}")]
    TooFewBases { min: usize, found: usize },

    #[error("minimization result does not belong to this set: {reason}")]
    ResultMismatch { reason: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
