//! Manifolds as atlases of embedded charts: induced metrics, orthonormal
//! frames, quadrature grids and the built-in zoo.

pub mod chart;
pub mod frame;
pub mod manifold;
pub mod octonion;
pub mod quadrature;
pub mod structure;
pub mod zoo;

pub use chart::Chart;
pub use frame::{orthonormal_frame, rotate_frame, FramedPoint};
pub use manifold::{induced_metric, ManifoldSpec, MetricField, QuadratureKind};
pub use octonion::{cross, octonion_cross};
pub use quadrature::{build_grid, gauss_legendre, unit_sphere_volume, GridNode, QuadratureGrid};
pub use structure::{MatrixField, Perturbation, StructureSource};
pub use zoo::{lookup, zoo, Expected, ZooEntry};
