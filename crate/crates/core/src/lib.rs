//! Flux forms on Riemannian chart domains and discrete complexes.
//!
//! The crate checks the pointwise identities relating force-free, harmonic,
//! geodesic and eikonal flux forms, moves fields between a metric and its
//! canonical conformal rescaling, and solves the linear levels of the L² and
//! L¹ flux minimization problems on grids.

pub mod conformal;
pub mod dec;
pub mod diagnostics;
pub mod error;
pub mod exterior;
pub mod fields;
pub mod flowlines;
pub mod quadrature;
pub mod sampling;
pub mod vtk;

pub use error::{Error, Result};
