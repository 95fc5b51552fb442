//! Numerical laboratory for lower-triangular Schur multipliers and the
//! operators they act on: generalized Cesaro and Volterra matrices built from
//! analytic symbols, summability-kernel multipliers, Hankel sections, and
//! lp operator-norm estimation for their finite sections.
//!
//! Everything works on dense N x N sections in complex double precision.
//! Norm routines report certified sides (lower bounds from iteration,
//! upper bounds from entrywise domination) rather than pretending exactness
//! away from p = 2.

pub mod error;
pub mod io;
pub mod kernels;
pub mod matrices;
pub mod norms;
pub mod par;
pub mod series;
pub mod spectral;

pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use matrices::{FiniteSection, MatrixKind, Structure, WeightSequence};
pub use norms::{NormBracket, NormEstimate, NormKind};
pub use series::CoefficientSequence;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
