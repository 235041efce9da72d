//! Mutually unbiased bases at desk scale: constructions, certification,
//! entropic uncertainty relations, and accessible-information locking.
//!
//! The crate builds the standard explicit MUB families (prime-dimension
//! Pauli eigenbases, the qubit triple I/H/K, Latin-square bases, and
//! product bases in square dimensions), verifies their algebraic
//! properties, minimizes average measurement entropy over pure states,
//! and evaluates the locking quantities of the associated state
//! ensembles.

pub mod designs;
pub mod entropy;
pub mod error;
pub mod jsonio;
pub mod linalg;
pub mod locking;
pub mod mubs;
pub mod reproduce;
pub mod squares;
pub mod tol;
pub mod uncertainty;

pub use error::{Error, Result};
