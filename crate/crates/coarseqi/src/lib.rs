//! Model geometries for coarse differentiation of quasi-isometries.
//!
//! The crate implements two families of model spaces carrying a height
//! function: the Diestel-Leader graphs `DL(m,n)` (exactly, over integer and
//! rational arithmetic) and the solvable Lie groups `Sol(m,n)` (numerically,
//! generic over the floating point scalar). On top of them sits a pipeline
//! that takes a candidate quasi-isometry and decides, with quantitative
//! certificates, whether and where it is height-respecting and close to a
//! product map: multi-scale monotonicity statistics, good-box selection,
//! product-map fitting, orientation analysis, and a multi-scale drift bound
//! feeding a final verdict.

pub mod config;
pub mod dl;
pub mod oracle;
pub mod sol;
pub mod space;
pub mod trees;

mod scalar;

pub use scalar::Scalar;

/// Double-precision Sol model, the default for pipeline work.
pub type Sol64 = sol::SolSpace<f64>;
/// Single-precision Sol model, mainly exercising the generic scalar bound.
pub type Sol32 = sol::SolSpace<f32>;

/// Crate-wide error type. `ConstraintViolation` names a configuration
/// inequality, `PreconditionViolation` an operation hypothesis, and
/// `AssertionFailed` a quantitative invariant that a pipeline stage promised
/// and could not deliver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("constraint violation [{name}]: {detail}")]
    ConstraintViolation { name: String, detail: String },
    #[error("precondition violation [{name}]: {detail}")]
    PreconditionViolation { name: String, detail: String },
    #[error("degenerate face: {detail}")]
    DegenerateFace { detail: String },
    #[error("parse error: {detail}")]
    Parse { detail: String },
    #[error("assertion failed [{invariant}]: {detail}")]
    AssertionFailed { invariant: String, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
