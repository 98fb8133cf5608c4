//! Calculus of tangent-bundle-valued forms: exterior derivative,
//! codifferential, Hodge and rough Laplacians, the Weitzenböck curvature
//! term, the Nijenhuis tensor, energy density and the Hermitian form.
//!
//! Two routes share the operator code in [`ops`]: [`FormCalculus`] builds
//! symbolic components per chart, while [`Evaluator`] evaluates everything
//! pointwise with jets and never forms large expressions.

pub mod form;
pub mod local;
pub mod ops;
pub mod pointwise;

pub use form::{conjugate_acs, FormCalculus, FormKind, TBForm, DEFAULT_BUDGET};
pub use local::{values, Derived, Evaluator, LocalPoint, NodeScalars};
pub use pointwise::{
    curvature_traces, energy_density, frame_components, nijenhuis, pointwise_inner,
    CurvatureTraces, StructureJet, VectorJet,
};

/// An almost complex structure is a degree-1 form flagged as such.
pub type Acs = TBForm;
