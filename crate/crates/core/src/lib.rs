//! Finite-difference stencils that preserve the dispersion relation, their
//! modified-wavenumber analysis, and two wave solvers built on them: a 1D
//! acoustic standing wave with an exact series solution and a 2D
//! velocity-stress elastic solver on a staggered grid.

pub mod acoustic1d;
pub mod dispersion;
pub mod elastic2d;
pub mod error;
pub mod io;
mod linalg;
pub mod metrics;
pub mod quadrature;
pub mod stencil;

pub use error::{Error, Result};
pub use stencil::{
    conventional_stencil, optimize_family, spectral_error, taylor_constraint_family, Extent, GridKind, Stencil,
    StencilFamily,
};

/// Rounds a time in seconds to whole nanoseconds, so that nominal sample
/// times such as `3 × 0.1` print as `0.3`.
pub fn round_time(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}
