//! The potential `p(s, x)` recovered from the limiting statistic, its small-x
//! expansion, the small-x form of `Phi` and the Schrödinger structure.
//!
//! `p = -d/dx log L - (4 alpha^2 - 1) / (8x)`, with `log L` from the Fredholm
//! determinant on a Chebyshev-Lobatto grid and differentiated spectrally.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel_limit::{DiscreteOperator, DEFAULT_ORDER};
use crate::error::{domain, Error, Result};
use crate::specfun::bessel::{bessel_i, bessel_j_any};
use crate::specfun::gamma::gamma_real;
use crate::specfun::polylog::fermi_dirac_moment;
use crate::symbols::{SParam, ThinningScale};

/// Minimum number of Chebyshev nodes in a profile.
pub const MIN_NODES: usize = 33;

/// Chebyshev-Lobatto points on `[a, b]`, ascending.
pub fn chebyshev_lobatto(n: usize, a: f64, b: f64) -> Vec<f64> {
    let k = (n - 1) as f64;
    (0..n)
        .map(|j| {
            let c = -(PI * j as f64 / k).cos();
            0.5 * (a + b) + 0.5 * (b - a) * c
        })
        .collect()
}

/// Derivative of the polynomial interpolant on Chebyshev-Lobatto points.
pub fn chebyshev_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let c = |i: usize| if i == 0 || i == n - 1 { 2.0 } else { 1.0 };
    let sign = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            let mut diag = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = c(i) / c(j) * sign(i + j) / (x[i] - x[j]);
                acc += d * f[j];
                diag -= d;
            }
            acc + diag * f[i]
        })
        .collect()
}

/// `p(s, .)` and its companions on a Chebyshev grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    pub x_grid: Vec<f64>,
    #[serde(rename = "logL")]
    pub log_l: Vec<f64>,
    pub p: Vec<f64>,
    /// `q = (p^2 - dp/dx) / 2`.
    pub q: Vec<f64>,
    /// `x^{2a+1} / (2^{2a+1} Gamma(a+1)^2) int u^a / (1 + e^{s+u^m}) du`.
    pub expansion_prediction: Vec<f64>,
    /// Relative error of `p + (4a^2-1)/(8x)` against the prediction.
    pub rel_err: Vec<f64>,
    pub s: f64,
    pub alpha: f64,
    pub m: u32,
    /// Largest change of `p` under node doubling on the interior two-thirds.
    pub diff_error: f64,
}

/// Singular part `(4 alpha^2 - 1) / (8x)`.
pub fn singular_term(alpha: f64, x: f64) -> f64 {
    (4.0 * alpha * alpha - 1.0) / (8.0 * x)
}

/// `log L(s, x)` by the Fredholm determinant.
pub fn log_l(alpha: f64, m: u32, s: f64, x: f64) -> Result<f64> {
    Ok(DiscreteOperator::new(alpha, ThinningScale::from_x(x, m), SParam::Finite(s), DEFAULT_ORDER)?.log_det())
}

/// `int_0^inf u^gamma / (1 + e^{s + u^m}) du`.
pub fn thinning_moment(gamma: f64, m: u32, s: f64) -> Result<f64> {
    let mf = m as f64;
    Ok(fermi_dirac_moment((gamma + 1.0) / mf, s)? / mf)
}

/// `lambda_k(s) = (-1)^k / (2 pi) int_0^inf v^{alpha+k} e^{-s-v^m} / (1 + e^{-s-v^m}) dv`.
pub fn lambda_k(alpha: f64, m: u32, s: f64, k: u32) -> Result<f64> {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * thinning_moment(alpha + k as f64, m, s)? / (2.0 * PI))
}

/// Prefactor `1 / (2^{2a+1} Gamma(a+1)^2)`.
fn expansion_prefactor(alpha: f64) -> f64 {
    let g = gamma_real(alpha + 1.0);
    1.0 / (2f64.powf(2.0 * alpha + 1.0) * g * g)
}

/// Leading small-x correction `p + (4a^2 - 1)/(8x)`.
pub fn expansion_prediction(alpha: f64, m: u32, s: f64, x: f64) -> Result<f64> {
    Ok(x.powf(2.0 * alpha + 1.0) * expansion_prefactor(alpha) * thinning_moment(alpha, m, s)?)
}

/// The same coefficient written as `2 pi lambda_0 / (2^{2a+1} Gamma(a+1)^2)`.
pub fn expansion_coefficient_from_lambda0(alpha: f64, m: u32, s: f64) -> Result<f64> {
    Ok(2.0 * PI * lambda_k(alpha, m, s, 0)? * expansion_prefactor(alpha))
}

fn profile_on(alpha: f64, m: u32, s: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let ll: Vec<f64> = x.iter().map(|&x| log_l(alpha, m, s, x)).collect::<Result<_>>()?;
    let d = chebyshev_derivative(x, &ll);
    let p = x.iter().zip(&d).map(|(&x, &d)| -d - singular_term(alpha, x)).collect();
    Ok((ll, p))
}

/// Recovers `p(s, .)` on `nodes` Chebyshev-Lobatto points of `[x_min, x_max]`,
/// checking against the grid with `2 nodes - 1` points (which contains the first).
/// The returned profile is the finer one.
pub fn extract_p(alpha: f64, m: u32, s: f64, x_min: f64, x_max: f64, nodes: usize, tol: f64) -> Result<PotentialProfile> {
    if !(x_min > 0.0) || !(x_max > x_min) || x_max > 2.0 {
        return domain(format!("x grid must lie in (0, 2], got [{x_min}, {x_max}]"));
    }
    if nodes < MIN_NODES {
        return domain(format!("need at least {MIN_NODES} nodes, got {nodes}"));
    }
    let coarse_x = chebyshev_lobatto(nodes, x_min, x_max);
    let fine_x = chebyshev_lobatto(2 * nodes - 1, x_min, x_max);
    let (_, coarse_p) = profile_on(alpha, m, s, &coarse_x)?;
    let (log_l, p) = profile_on(alpha, m, s, &fine_x)?;
    let lo = x_min + (x_max - x_min) / 6.0;
    let hi = x_max - (x_max - x_min) / 6.0;
    let diff_error = coarse_x
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= lo && x <= hi)
        .map(|(i, _)| (coarse_p[i] - p[2 * i]).abs())
        .fold(0.0, f64::max);
    if diff_error > tol {
        let worst: Vec<String> = coarse_x
            .iter()
            .enumerate()
            .filter(|(_, &x)| x >= lo && x <= hi)
            .map(|(i, x)| format!("x={x:.6}: {} vs {}", coarse_p[i], p[2 * i]))
            .collect();
        return Err(Error::NoConvergence(format!(
            "p differs by {diff_error:.3e} between {nodes} and {} nodes; {}",
            2 * nodes - 1,
            worst.join("; ")
        )));
    }
    let dp = chebyshev_derivative(&fine_x, &p);
    let q = p.iter().zip(&dp).map(|(p, dp)| 0.5 * (p * p - dp)).collect();
    let g = thinning_moment(alpha, m, s)?;
    let pre = expansion_prefactor(alpha);
    let expansion_prediction: Vec<f64> = fine_x.iter().map(|&x| x.powf(2.0 * alpha + 1.0) * pre * g).collect();
    let rel_err = fine_x
        .iter()
        .zip(&p)
        .zip(&expansion_prediction)
        .map(|((&x, &p), &e)| ((p + singular_term(alpha, x)) - e).abs() / e.abs())
        .collect();
    Ok(PotentialProfile {
        x_grid: fine_x,
        log_l,
        p,
        q,
        expansion_prediction,
        rel_err,
        s,
        alpha,
        m,
        diff_error,
    })
}

/// Local Chebyshev profile centred on `x`; returns `(p(x), dp/dx(x))`.
pub fn local_p(alpha: f64, m: u32, s: f64, x: f64) -> Result<(f64, f64)> {
    let grid = chebyshev_lobatto(MIN_NODES, 0.5 * x, 1.5 * x);
    let (_, p) = profile_on(alpha, m, s, &grid)?;
    let dp = chebyshev_derivative(&grid, &p);
    let mid = MIN_NODES / 2;
    Ok((p[mid], dp[mid]))
}

/// Numeric and predicted small-x correction of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallXCheck {
    pub x: f64,
    pub numeric: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

pub fn small_x_expansion_check(alpha: f64, m: u32, s: f64, x: f64) -> Result<SmallXCheck> {
    if !(x > 0.0 && x <= 0.3) {
        return domain(format!("small-x check needs 0 < x <= 0.3, got {x}"));
    }
    let numeric = local_p(alpha, m, s, x)?.0 + singular_term(alpha, x);
    let predicted = expansion_prediction(alpha, m, s, x)?;
    Ok(SmallXCheck {
        x,
        numeric,
        predicted,
        rel_err: (numeric - predicted).abs() / predicted.abs(),
    })
}

/// Least-squares fit `y = C x^e`; returns `(e, C)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let e = sxy / sxx;
    (e, (my - e * mx).exp())
}

/// Leading-order `Phi(zeta | s, x) = sqrt(pi) x^{1/2} I_alpha(x zeta^{1/2})`; for
/// `zeta < 0` the `+` boundary value `sqrt(pi) x^{1/2} e^{i pi alpha/2} J_alpha(x |zeta|^{1/2})`.
pub fn phi_small_x(alpha: f64, zeta: f64, x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return domain(format!("phi_small_x needs x > 0, got {x}"));
    }
    let pre = PI.sqrt() * x.sqrt();
    if zeta >= 0.0 {
        Ok(Complex64::new(pre * bessel_i(alpha, x * zeta.sqrt())?, 0.0))
    } else {
        let j = bessel_j_any(alpha, x * (-zeta).sqrt());
        Ok(Complex64::from_polar(1.0, 0.5 * PI * alpha) * (pre * j))
    }
}

/// Real profile `x^{1/2} I_alpha(x zeta^{1/2})`, or `x^{1/2} J_alpha(x |zeta|^{1/2})` for
/// `zeta < 0`, which solves `f'' = (zeta + (4a^2-1)/(4x^2)) f`.
fn bessel_profile(alpha: f64, zeta: f64, x: f64) -> f64 {
    if zeta >= 0.0 {
        x.sqrt() * bessel_i(alpha, x * zeta.sqrt()).unwrap_or(f64::NAN)
    } else {
        x.sqrt() * bessel_j_any(alpha, x * (-zeta).sqrt())
    }
}

/// Sixth-order central second difference.
pub fn second_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    const C: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let mut acc = C[0] * f(x);
    for (k, c) in C.iter().enumerate().skip(1) {
        let d = k as f64 * h;
        acc += c * (f(x + d) + f(x - d));
    }
    acc / (h * h)
}

/// Relative residual of the Bessel ODE for `x^{1/2} I_alpha(x zeta^{1/2})` by
/// finite differences with step `x/50`.
pub fn bessel_ode_residual(alpha: f64, zeta: f64, x: f64) -> f64 {
    let f = |y: f64| bessel_profile(alpha, zeta, y);
    let lhs = second_difference(f, x, x / 50.0);
    let coef = zeta + singular_term(alpha, x) * 2.0 / x;
    (lhs - coef * f(x)).abs() / (coef.abs() * f(x).abs())
}

/// `d^2/dx^2 Phi - (zeta + 2 dp/dx) Phi` relative to `|zeta + (4a^2-1)/(4x^2)| |Phi|`,
/// with the leading-order `Phi` and the numeric `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchroedingerResidual {
    pub x: f64,
    pub zeta: f64,
    pub s: f64,
    pub dp_dx: f64,
    pub relative: f64,
}

pub fn schroedinger_residual(alpha: f64, zeta: f64, s: f64, x: f64) -> Result<SchroedingerResidual> {
    if !(0.05..=0.3).contains(&x) {
        return domain(format!("Schrödinger check needs x in [0.05, 0.3], got {x}"));
    }
    let (_, dp) = local_p(alpha, 1, s, x)?;
    let f = |y: f64| bessel_profile(alpha, zeta, y);
    let fx = f(x);
    let lhs = second_difference(f, x, x / 50.0);
    let res = lhs - (zeta + 2.0 * dp) * fx;
    let scale = (zeta + singular_term(alpha, x) * 2.0 / x).abs() * fx.abs();
    Ok(SchroedingerResidual {
        x,
        zeta,
        s,
        dp_dx: dp,
        relative: res.abs() / scale,
    })
}
