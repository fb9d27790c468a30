//! The Bessel parametrix: explicit evaluation, jump relations, large-z
//! expansion and the analytic factor at the origin.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::bessel::{
    bessel_entire_series, bessel_i_complex, bessel_i_prime_complex, bessel_i_scaled_series, bessel_k_complex,
    bessel_k_prime_complex, bessel_k_prime_scaled, bessel_k_scaled,
};
use crate::specfun::gamma::{gamma_real, rgamma};

pub type Matrix2C = Matrix2<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn e12() -> Matrix2C {
    Matrix2C::new(c(0.0), c(1.0), c(0.0), c(0.0))
}

pub fn e21() -> Matrix2C {
    Matrix2C::new(c(0.0), c(0.0), c(1.0), c(0.0))
}

/// Largest entry modulus.
pub fn max_abs(m: &Matrix2C) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `U_0 = (1/sqrt 2) [[1, i], [i, 1]]`.
pub fn u0() -> Matrix2C {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2C::new(c(s), I * s, I * s, c(s))
}

fn is_integer(a: f64) -> bool {
    a == a.round()
}

/// Bare matrix of Bessel functions at `z = r e^{i theta}`, `sqrt z = sqrt r e^{i theta/2}`.
fn bessel_block(alpha: f64, r: f64, theta: f64) -> Result<Matrix2C> {
    let sz = Complex64::from_polar(r.sqrt(), 0.5 * theta);
    let w = sz * 2.0;
    let i0 = bessel_i_complex(alpha, w);
    let i1 = bessel_i_prime_complex(alpha, w);
    let k0 = bessel_k_complex(alpha, w)?;
    let k1 = bessel_k_prime_complex(alpha, w)?;
    Ok(Matrix2C::new(
        i0,
        I / PI * k0,
        I * (2.0 * PI) * sz * i1,
        -sz * 2.0 * k1,
    ))
}

/// Right factor `I -+ e^{+-i pi alpha} E21` in the outer sectors `2pi/3 < +-theta`.
fn sector_factor(alpha: f64, theta: f64, outer: bool) -> Matrix2C {
    if !outer {
        return Matrix2C::identity();
    }
    if theta > 0.0 {
        Matrix2C::identity() - e21() * Complex64::from_polar(1.0, PI * alpha)
    } else {
        Matrix2C::identity() + e21() * Complex64::from_polar(1.0, -PI * alpha)
    }
}

/// `Phi_alpha(z)` at `z = r e^{i theta}` with `|theta| <= pi`; `theta = +-pi` gives the
/// boundary values on the negative axis from above and below.
pub fn parametrix_polar(alpha: f64, r: f64, theta: f64) -> Result<Matrix2C> {
    if !(alpha > -1.0) {
        return domain(format!("alpha must exceed -1, got {alpha}"));
    }
    if !(r > 0.0) || theta.abs() > PI {
        return domain(format!("need r > 0 and |theta| <= pi, got ({r}, {theta})"));
    }
    let outer = theta.abs() > 2.0 * PI / 3.0;
    Ok(bessel_block(alpha, r, theta)? * sector_factor(alpha, theta, outer))
}

/// `Phi_alpha(z)` for `z` off `(-inf, 0]`.
pub fn parametrix(alpha: f64, z: Complex64) -> Result<Matrix2C> {
    if z.im == 0.0 && z.re <= 0.0 {
        return domain(format!("z = {z} lies on the cut; use boundary_value"));
    }
    parametrix_polar(alpha, z.norm(), z.arg())
}

/// Jump contours: the negative axis and the rays at angle `+-2pi/3`, all oriented towards 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ray {
    Negative,
    Upper,
    Lower,
}

/// Side of an oriented contour; `Plus` is on the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Boundary value of `Phi_alpha` at distance `r` from 0 along `ray`.
pub fn boundary_value(alpha: f64, ray: Ray, r: f64, side: Side) -> Result<Matrix2C> {
    if !(alpha > -1.0) || !(r > 0.0) {
        return domain(format!("bad boundary point alpha={alpha}, r={r}"));
    }
    let theta = match ray {
        Ray::Negative => {
            let t = if side == Side::Plus { PI } else { -PI };
            return parametrix_polar(alpha, r, t);
        }
        Ray::Upper => 2.0 * PI / 3.0,
        Ray::Lower => -2.0 * PI / 3.0,
    };
    // the left side of either ray is its clockwise side
    let outer = !matches!((ray, side), (Ray::Upper, Side::Plus) | (Ray::Lower, Side::Minus));
    Ok(bessel_block(alpha, r, theta)? * sector_factor(alpha, theta, outer))
}

/// Jump matrix on each ray.
pub fn jump_matrix(alpha: f64, ray: Ray) -> Matrix2C {
    match ray {
        Ray::Negative => e12() - e21(),
        Ray::Upper => Matrix2C::identity() + e21() * Complex64::from_polar(1.0, PI * alpha),
        Ray::Lower => Matrix2C::identity() + e21() * Complex64::from_polar(1.0, -PI * alpha),
    }
}

/// `max |Phi_+ - Phi_- J|` at distance `r` along `ray`.
pub fn jump_residual(alpha: f64, ray: Ray, r: f64) -> Result<f64> {
    let p = boundary_value(alpha, ray, r, Side::Plus)?;
    let m = boundary_value(alpha, ray, r, Side::Minus)?;
    Ok(max_abs(&(p - m * jump_matrix(alpha, ray))))
}

/// `(alpha, k) = prod_{j=1..k} (4 alpha^2 - (2j-1)^2) / (2^{2k} k!)`.
pub fn alpha_symbol(alpha: f64, k: u32) -> f64 {
    let mu = 4.0 * alpha * alpha;
    let mut p = 1.0;
    for j in 1..=k {
        let o = (2 * j - 1) as f64;
        p *= (mu - o * o) / (4.0 * j as f64);
    }
    p
}

/// `(a_k, b_k)` of the large-z expansion, `k >= 1`.
pub fn expansion_coefficients(alpha: f64, k: u32) -> Result<(f64, f64)> {
    if k == 0 {
        return domain("expansion coefficients start at k = 1");
    }
    let kf = k as f64;
    let p = alpha_symbol(alpha, k - 1);
    let q = 4f64.powi(k as i32);
    Ok((p / (q * kf) * (alpha * alpha + 0.5 * kf - 0.25), p / q * (kf - 0.5)))
}

/// Left normalisation `(I + i(a_1 + b_1) E21) (2 pi)^{sigma_3/2}`.
fn psi_prefactor(alpha: f64) -> Matrix2C {
    let (a1, b1) = expansion_coefficients(alpha, 1).unwrap_or((0.0, 0.0));
    let t = (2.0 * PI).sqrt();
    (Matrix2C::identity() + e21() * (I * (a1 + b1))) * Matrix2C::new(c(t), c(0.0), c(0.0), c(1.0 / t))
}

/// `Psi_alpha(z) = (I + i(a_1+b_1) E21) (2pi)^{sigma_3/2} Phi_alpha(z)`.
pub fn psi_bes(alpha: f64, z: Complex64) -> Result<Matrix2C> {
    Ok(psi_prefactor(alpha) * parametrix(alpha, z)?)
}

/// `Psi_alpha(z) e^{-2 z^{1/2} sigma_3} U_0^{-1} z^{sigma_3/4}` for real `z > 0`, built
/// from exponentially scaled Bessel functions; tends to `I + Psi_1 / z + ...`.
pub fn normalized_psi(alpha: f64, z: f64) -> Result<Matrix2C> {
    if !(z > 0.0) {
        return domain(format!("normalized_psi needs z > 0, got {z}"));
    }
    let sz = z.sqrt();
    let w = 2.0 * sz;
    let is = bessel_i_scaled_series(alpha, w);
    let is1 = bessel_i_scaled_series(alpha + 1.0, w);
    let ip = is1 + alpha / w * is;
    let ks = bessel_k_scaled(alpha, w);
    let kp = bessel_k_prime_scaled(alpha, w);
    let phi = Matrix2C::new(c(is), I / PI * ks, I * (2.0 * PI * sz * ip), c(-2.0 * sz * kp));
    let u_inv = u0().try_inverse().expect("U_0 is unitary");
    let q = z.powf(0.25);
    Ok(psi_prefactor(alpha) * phi * u_inv * Matrix2C::new(c(q), c(0.0), c(0.0), c(1.0 / q)))
}

/// `Psi_{inf,1}` assembled from the coefficients `a_k, b_k`.
pub fn psi_inf_1(alpha: f64) -> Matrix2C {
    let ab = |k| expansion_coefficients(alpha, k).expect("k >= 1");
    let (a1, b1) = ab(1);
    let (a2, b2) = ab(2);
    let (a3, b3) = ab(3);
    let inner = Matrix2C::new(c(a2 - b2), I * (a1 - b1), -I * (a3 + b3), c(a2 + b2));
    (Matrix2C::identity() + e21() * (I * (a1 + b1))) * inner
}

/// Comparison of `Psi_alpha` with its large-z expansion at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticMatch {
    pub z: f64,
    /// `|(Psi)_11 e^{-2 z^{1/2}} / (z^{-1/4}/sqrt 2) - 1|`
    pub rel_err_11: f64,
    /// `|z ((N)_12) - (Psi_1)_12|` with `N` the normalised matrix.
    pub err_12: f64,
}

pub fn asymptotic_match(alpha: f64, z: f64) -> Result<AsymptoticMatch> {
    if z < 100.0 {
        return domain(format!("asymptotic comparison needs z >= 100, got {z}"));
    }
    let w = 2.0 * z.sqrt();
    let psi11 = (2.0 * PI).sqrt() * bessel_i_scaled_series(alpha, w);
    let lead = z.powf(-0.25) * std::f64::consts::FRAC_1_SQRT_2;
    let n = normalized_psi(alpha, z)?;
    Ok(AsymptoticMatch {
        z,
        rel_err_11: (psi11 / lead - 1.0).abs(),
        err_12: (n[(0, 1)] * z - psi_inf_1(alpha)[(0, 1)]).norm(),
    })
}

/// Least-squares fit of an entry of the normalised matrix as a polynomial of
/// degree 4 in `z^{-1/2}` over `z = 400 * 2^k`, `k = 0..7`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    /// Coefficients of `1, z^{-1/2}, z^{-1}, z^{-3/2}, z^{-2}` as (re, im).
    pub coeffs: [(f64, f64); 5],
}

impl ExpansionFit {
    /// Fitted `1/z` coefficient.
    pub fn inverse_z(&self) -> Complex64 {
        Complex64::new(self.coeffs[2].0, self.coeffs[2].1)
    }

    pub fn constant(&self) -> Complex64 {
        Complex64::new(self.coeffs[0].0, self.coeffs[0].1)
    }
}

pub fn fit_expansion(alpha: f64, row: usize, col: usize) -> Result<ExpansionFit> {
    let zs: Vec<f64> = (0..8).map(|k| 400.0 * 2f64.powi(k)).collect();
    let vals: Vec<Complex64> = zs
        .iter()
        .map(|&z| normalized_psi(alpha, z).map(|n| n[(row, col)]))
        .collect::<Result<_>>()?;
    let a = DMatrix::from_fn(zs.len(), 5, |i, j| zs[i].powf(-0.5 * j as f64));
    let svd = a.svd(true, true);
    let solve = |rhs: DVector<f64>| svd.solve(&rhs, 1e-14).expect("SVD with vectors");
    let re = solve(DVector::from_iterator(zs.len(), vals.iter().map(|v| v.re)));
    let im = solve(DVector::from_iterator(zs.len(), vals.iter().map(|v| v.im)));
    let mut coeffs = [(0.0, 0.0); 5];
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c = (re[j], im[j]);
    }
    Ok(ExpansionFit { coeffs })
}

/// The scalar `a_alpha(z)` in the local factor at the origin.
pub fn origin_factor(alpha: f64, z: Complex64) -> Complex64 {
    if is_integer(alpha) {
        Complex64::from_polar(1.0, PI * alpha) / (I * 2.0 * PI) * z.ln()
    } else {
        c(1.0) / (I * 2.0 * (alpha * PI).sin())
    }
}

/// `Phi_{alpha,0}(0)` in closed form.
pub fn value_at_zero(alpha: f64) -> Result<Matrix2C> {
    if !(alpha > -1.0) {
        return domain(format!("alpha must exceed -1, got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(Matrix2C::new(c(1.0), -I / PI * 2f64.ln(), c(0.0), c(1.0)));
    }
    let g = gamma_real(alpha);
    Ok(Matrix2C::new(
        c(rgamma(alpha + 1.0)),
        I * (g / (2.0 * PI)),
        I * (PI / g),
        c(0.5 * gamma_real(alpha + 1.0)),
    ))
}

/// `Phi_{alpha,0}(z) = Phi_alpha(z) (I + a(z) E12)^{-1} z^{-alpha sigma_3 / 2}` for real `z > 0`.
pub fn analytic_factor(alpha: f64, z: f64) -> Result<Matrix2C> {
    let zc = c(z);
    let phi = parametrix(alpha, zc)?;
    let a = origin_factor(alpha, zc);
    let inv = Matrix2C::identity() - e12() * a;
    let p = z.powf(0.5 * alpha);
    Ok(phi * inv * Matrix2C::new(c(1.0 / p), c(0.0), c(0.0), c(p)))
}

/// `Phi_{alpha,0}(0)` extrapolated from `z = j 10^{-3}`, `j = 1..8`, by Neville's scheme.
pub fn value_at_zero_numeric(alpha: f64) -> Result<Matrix2C> {
    let h = 1e-3;
    let pts: Vec<(f64, Matrix2C)> = (1..=8)
        .map(|j| {
            let z = h * j as f64;
            analytic_factor(alpha, z).map(|m| (z, m))
        })
        .collect::<Result<_>>()?;
    let mut t: Vec<Matrix2C> = pts.iter().map(|p| p.1).collect();
    let n = t.len();
    for lvl in 1..n {
        for i in 0..n - lvl {
            let (zi, zj) = (pts[i].0, pts[i + lvl].0);
            t[i] = (t[i + 1] * c(zi) - t[i] * c(zj)) / c(zi - zj);
        }
    }
    Ok(t[0])
}

/// Residuals of the first-column identities at real `z > 0`:
/// `z^{-a/2} Phi_11 = F_a(z)` and `z^{-a/2} Phi_21 = pi i a F_a(z) + 2 pi i z F_a'(z)`.
pub fn first_column_residual(alpha: f64, z: f64) -> Result<(f64, f64)> {
    let phi = parametrix(alpha, c(z))?;
    let p = z.powf(-0.5 * alpha);
    let f = bessel_entire_series(alpha, z);
    // F_a' = F_{a+1}
    let fp = bessel_entire_series(alpha + 1.0, z);
    let r11 = (phi[(0, 0)] * p - f).norm() / f.abs();
    let rhs = I * (PI * alpha * f + 2.0 * PI * z * fp);
    let r21 = (phi[(1, 0)] * p - rhs).norm() / rhs.norm().max(1e-300);
    Ok((r11, r21))
}
