//! Numerical tolerances used throughout the crate.
//!
//! Everything here is sized for dense double-precision work in dimensions
//! up to a few thousand; the constructions this crate deals in are exact
//! in theory, so the thresholds mostly absorb accumulated rounding.

/// Norm drift allowed for state vectors and probability vectors.
pub const TOL_NORM: f64 = 1e-9;

/// Hermitian symmetry defect allowed when a Hermitian matrix is expected.
pub const TOL_HERM: f64 = 1e-9;

/// Residual allowed in the eigen-equation `A v = lambda v`.
pub const TOL_EIG: f64 = 1e-8;

/// How negative an eigenvalue of a density operator may be before it is
/// rejected rather than clamped to zero.
pub const TOL_PSD: f64 = 1e-9;

/// Smallest amplitude modulus used to pick the phase-anchor component of
/// an eigenvector.
pub const TOL_PHASE: f64 = 1e-8;

/// Allowed deviation of |<b_k|b'_l>|^2 from 1/d between unbiased bases.
pub const TOL_MUB: f64 = 1e-9;

/// Allowed deviation from unit fidelity when matching a permuted basis
/// vector.
pub const TOL_PERM: f64 = 1e-8;

/// Completeness defect allowed for a POVM (max-modulus entry of
/// `sum_i alpha_i |phi_i><phi_i| - I`).
pub const TOL_POVM: f64 = 1e-9;

/// Probabilities below this are treated as exact zeros in entropy sums.
pub const PROB_ZERO: f64 = 1e-15;

/// Probabilities below this are dropped from entropy gradients (the
/// subgradient choice consistent with `0 log 0 = 0`).
pub const GRAD_PRUNE: f64 = 1e-12;
