//! Construction and empirical verification of heat kernels for non-symmetric
//! Lévy-type operators of order at most one.
//!
//! The operator acts as
//!
//! ```text
//! L f(x) = ∫ ( f(x+z) − f(x) − 1_{|z|<1} ⟨z, ∇f(x)⟩ ) κ(x,z) J(z) dz ,
//! ```
//!
//! with a radial, unimodal reference density `ν` comparable to `J` and a
//! bounded, Hölder coefficient `κ`. The fundamental solution is assembled by
//! the parametrix method: the kernel of the constant-coefficient operator
//! obtained by freezing `κ` at a base point is corrected by a space-time
//! convolution series. The [`verifier`] module then measures the theorem-level
//! properties of the result (mass, Chapman–Kolmogorov, envelope bounds, PDE
//! residual, contraction) and reports fitted constants instead of asserting
//! values the theory leaves non-explicit.
//!
//! Pipeline stages live in [`pipeline`]; the bundled CLI is a thin wrapper.

pub mod coefficient;
pub mod config;
pub mod frozen;
pub mod grid;
pub mod interp;
pub mod parametrix;
pub mod pipeline;
pub mod profile;
pub mod quad;
pub mod scale;
pub mod verifier;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("profile rejected: {0}")]
    ProfileRejected(String),
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
    #[error("regime rejected: {0}")]
    RegimeRejected(String),
    #[error("symbol not coercive; increase t_min or the frequency cutoff ({0})")]
    SymbolNotCoercive(String),
    #[error("Picard series diverged: {0}")]
    SeriesDiverged(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("request outside the interpolation window: {0}")]
    OutOfWindow(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing stage artifact: {0}")]
    MissingArtifact(String),
    #[error("malformed artifact file: {0}")]
    BadArtifact(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use coefficient::{Coefficient, RegimeReport};
pub use config::RunConfig;
pub use frozen::FrozenKernelCache;
pub use grid::KernelField;
pub use profile::UnimodalProfile;
pub use scale::ScaleFunctions;
pub use verifier::PropertyReport;
