//! Finite-n orthogonal polynomials, kernels and the multiplicative statistic.

pub mod discretize;
pub mod kernel;
pub mod recurrence;
pub mod statistic;

pub use discretize::{Discretization, DiscretizationOptions};
pub use kernel::{KernelKind, KernelTable};
pub use recurrence::{build_recurrence, RecurrenceTable, N_MAX};
pub use statistic::{
    deformation_integrand, log_ratio_from_tables, multiplicative_statistic_deformation_route,
    multiplicative_statistic_det_route, multiplicative_statistic_gamma_route, DeformationOptions,
    DeformationResult, FiniteEnsemble,
};
