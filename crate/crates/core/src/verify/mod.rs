//! Named checks of the identities, integral criteria and inequalities for
//! almost complex structures, evaluated over quadrature grids and collected
//! into JSON reports.
//!
//! A run computes one [`Sweep`] per manifold: every pointwise quantity at
//! every grid node plus a set of uniform extra points. Checks then read the
//! sweep; those that need random forms or vectors re-evaluate a seeded node
//! sample. All randomness derives from the suite seed, and reductions are
//! sequential over an ordered node list, so reports are byte-identical for a
//! fixed seed regardless of the number of threads.

pub mod checks;
pub mod random;
pub mod report;
pub mod suite;
pub mod sweep;

pub use report::{CheckResult, Environment, Report, ToleranceProfile, Tolerances, SUITE_VERSION};
pub use suite::{
    convergence, diagnose, global_inner, is_known_check, manifold_checks, min_bochner_integrand,
    perturbation_sweep, run_check, run_suite, with_threads, ConvergenceRow, ConvergenceTable,
    Diagnosis, SuiteConfig, CHECKS, CONVERGENCE_QUANTITIES, PERTURBATION_EPS,
};
pub use sweep::{NodeRecord, Sweep};
