//! 2D P-SV elastic waves in velocity-stress form on a staggered grid.
//!
//! With `(i, j)` the integer node at `x = i·dx`, `z = j·dz` (z down):
//!
//! | field        | lattice          | shape              |
//! |--------------|------------------|--------------------|
//! | `txx`, `tzz` | `(i, j)`         | `nx × nz`          |
//! | `vx`         | `(i + ½, j)`     | `(nx − 1) × nz`    |
//! | `vz`         | `(i, j + ½)`     | `nx × (nz − 1)`    |
//! | `txz`        | `(i + ½, j + ½)` | `(nx − 1) × (nz − 1)` |

mod difference;
mod model;
mod solver;

pub use difference::{field_difference, DifferenceSummary, FieldDifference};
pub use model::{build_two_layer_model, ElasticConfig, ElasticModel, Layer, RickerSource};
pub use solver::{run, run_model, step, Stepper, stability_number, ElasticScheme, FieldName, SnapshotSet, StaggeredFields, StencilPair};
