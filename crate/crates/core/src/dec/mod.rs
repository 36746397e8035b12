//! Discrete exterior calculus on grids and triangle meshes, with the linear
//! solvers for the L² and L¹ flux levels.

pub mod cochain;
pub mod complex;
pub mod io;
pub mod kkt;
pub mod l1;
pub mod l2;
pub mod skyline;
pub mod sparse;

pub use cochain::{integrate_form, sample_to_cochain, sample_to_cochain_with, Cochain};
pub use complex::{disk_mesh, ChartMap, Complex, Geometry, GridSpec, SimplicialSpec};
pub use kkt::{hierarchy_report, kkt_residual_l1_isotopy, kkt_residual_l2_isotopy, normalization_lemma_check, CellCovectors, HierarchyReport, Reconstruction};
pub use sparse::{conjugate_gradient, CgOptions, CgReport, Csr};
