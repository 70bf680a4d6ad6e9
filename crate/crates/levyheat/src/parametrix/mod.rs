//! Levi's construction: the correction density q (Picard series driven by
//! q₀), the correction term φ, the assembled heat kernel p^κ, and the
//! ε-truncated operator on gridded kernels.
//!
//! Displacement convention, pinned globally: p^{𝔎}(t,x,y) = p^{𝔎}(t, y−x).

pub mod mesh;
mod phi;
mod series;
mod truncated;

pub use phi::PhiEngine;
pub use series::{Convolver, SeriesDiagnostics};
pub use truncated::{apply_truncated_operator, TruncatedOp};
