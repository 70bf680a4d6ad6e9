//! Frozen-coefficient heat kernels: symbols, Fourier-inverted density and
//! gradient ladders per base point, and frozen-operator application.

mod cache;
mod symbol;

pub use cache::{ClipStats, FrozenCacheParams, FrozenKernelCache};
pub use symbol::{eval_symbol, FrozenSymbolTable};
