//! Special functions and quadrature.

pub mod bessel;
pub mod gamma;
pub mod polylog;
pub mod quadrature;
pub mod tridiag;

pub use bessel::{
    bessel_entire_series, bessel_i, bessel_i_complex, bessel_i_prime, bessel_i_scaled, bessel_j, bessel_j_any,
    bessel_j_prime, bessel_k, bessel_k_complex, bessel_k_prime, bessel_k_scaled,
};
pub use gamma::{gamma, gamma_real, ln_gamma, rgamma};
pub use polylog::{
    f_beta, f_beta_polylog, f_beta_quadrature, fermi_dirac_moment, laguerre_asymptotic_integral, polylog,
    AsymptoticIntegral,
};
pub use quadrature::{Domain, QuadratureRule};
pub use tridiag::{tridiag_eigen, TridiagEigen};
