//! Truncated Hilbert-space laboratory for uniform equicontinuity of operator
//! families in the weak topology.
//!
//! The crate is split into three layers:
//!
//! * [`space`]: basis indexings, unit-ball vectors, the dense-sequence
//!   metric scheme and the weak metrics `rho` (on the ball of `H`) and `d`
//!   (on the ball of `B(H)`).
//! * [`operators`]: contractions, the shift and multiplication families, and
//!   the super-maps `A -> TA`, `A -> AT`, `A -> u A u*`.
//! * [`analysis`]: dimension criterion, banded check, isometry preimage
//!   check, modulus estimation, non-UEC certificate search and the
//!   correspondence checks built from them.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod space;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Numeric tolerances shared by every engine.
pub mod tol {
    /// Slack on `||x|| <= 1` and `sigma_max(T) <= 1`.
    pub const NORM: f64 = 1e-9;
    /// Algebraic identity checks.
    pub const IDENTITY: f64 = 1e-12;
    /// SVD and rank thresholds.
    pub const RANK: f64 = 1e-9;
    /// Singular-value tie-breaking at `sigma = c`.
    pub const SINGULAR_TIE: f64 = 1e-9;
    /// Unitarity defect above which conjugation operands are polar-corrected.
    pub const UNITARY_DEFECT: f64 = 1e-6;
    /// Smallest singular value accepted as "bounded below".
    pub const BOUNDED_BELOW: f64 = 1e-6;
    /// Rank threshold used by the randomized oracle.
    pub const ORACLE_RANK: f64 = 1e-6;
    /// Relative tolerance for modulus and statistical assertions.
    pub const STATISTICAL: f64 = 1e-2;
}
