//! Hard-edge statistics for conditionally thinned Laguerre-type ensembles.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod specfun;

pub use error::{Error, Result};
pub mod bessel_limit;
pub mod equilibrium;
pub mod mc;
pub mod nonlocal;
pub mod ops;
pub mod parametrix;
pub mod symbols;

pub use equilibrium::{p0_global_parametrix, solve_equilibrium, thinning_scale, EquilibriumData};
pub use symbols::{ModelConfig, SParam, ThinningScale};
