//! Analytic fields on chart domains, metric fields and first-order calculus.

pub mod calculus;
pub mod catalog;
pub mod domain;
pub mod expr;
pub mod field;
pub mod jet;
pub mod metric;

pub use calculus::{associated_flux_form, christoffel, covariant_derivative, divergence, exterior_derivative, flux_form_at};
pub use catalog::{catalog, custom_field, CustomFieldSpec, FieldSpec};
pub use domain::{ChartDomain, Constraint};
pub use field::{FdOptions, FieldKind, SmoothField, DEFAULT_H_FD};
pub use jet::Jet;
pub use metric::{BaseMetric, Christoffel, LogFactor, MetricField, DEFAULT_EPS_SUPP};
