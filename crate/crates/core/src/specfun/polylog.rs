//! Polylogarithm on `(-1, 0]` and the Fermi-Dirac type integrals built from it.

use super::gamma::gamma_real;
use super::quadrature::QuadratureRule;
use crate::error::{domain, Result};

/// `log(1 + e^{-z})` without overflow or cancellation.
pub fn log1p_exp_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `Li_sigma(z) = sum_{k>=1} z^k / k^sigma` for `z` in `(-1, 0]`.
///
/// Direct summation for `|z| <= 1/2`; below that the alternating tail is
/// accelerated with the Cohen-Rodriguez Villegas-Zagier weights, which need
/// `sigma > 0` so that the terms are moments of a positive measure.
pub fn polylog(sigma: f64, z: f64) -> Result<f64> {
    if !(z > -1.0) || z > 0.0 || !sigma.is_finite() {
        return domain(format!("polylog requires z in (-1, 0], got {z}"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z >= -0.5 || sigma <= 0.0 {
        let mut zk = z;
        let mut sum = 0.0;
        for k in 1..20_000 {
            let term = zk / (k as f64).powf(sigma);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
            zk *= z;
        }
        return Ok(sum);
    }
    let r = -z;
    // Li = -sum_{j>=0} (-1)^j a_j with a_j = r^{j+1} / (j+1)^sigma
    let n = 40usize;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    let mut rk = r;
    for k in 0..n {
        let kf = k as f64;
        c = b - c;
        s += c * rk / (kf + 1.0).powf(sigma);
        b = (kf + n as f64) * (kf - n as f64) * b / ((kf + 0.5) * (kf + 1.0));
        rk *= r;
    }
    Ok(-s / d)
}

/// `F_beta(s) = int_0^inf x^beta log(1 + e^{-s-x}) dx` by quadrature, any real `s`.
pub fn f_beta_quadrature(beta: f64, s: f64) -> Result<f64> {
    if !(beta > -1.0) {
        return domain(format!("F_beta requires beta > -1, got {beta}"));
    }
    // the integrand has poles at x = -s +- i pi; panels of width 2 keep them far
    let head = QuadratureRule::gauss_jacobi_left(30, beta, 0.0, 2.0)?;
    let mut total = head.integrate(|x| log1p_exp_neg(s + x));
    let mut lo = 2.0;
    let stop = 60.0 + (-s).max(0.0) + 10.0 * beta.max(0.0);
    while lo < stop {
        let r = QuadratureRule::gauss_legendre(24, lo, lo + 2.0);
        total += r.integrate(|x| x.powf(beta) * log1p_exp_neg(s + x));
        lo += 2.0;
    }
    Ok(total)
}

/// `F_beta(s) = -Gamma(beta + 1) Li_{beta+2}(-e^{-s})`, `s > 0`.
pub fn f_beta_polylog(beta: f64, s: f64) -> Result<f64> {
    if !(beta > -1.0) {
        return domain(format!("F_beta requires beta > -1, got {beta}"));
    }
    if !(s > 0.0) {
        return domain(format!("polylog route requires s > 0, got {s}"));
    }
    Ok(-gamma_real(beta + 1.0) * polylog(beta + 2.0, -(-s).exp())?)
}

/// `int_0^inf y^{beta-1} / (1 + e^{s+y}) dy = -Gamma(beta) Li_beta(-e^{-s})`, by
/// quadrature, `beta > 0`, any real `s`.
pub fn fermi_dirac_moment(beta: f64, s: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return domain(format!("Fermi-Dirac moment requires beta > 0, got {beta}"));
    }
    let f = |y: f64| 1.0 / (1.0 + (s + y).exp());
    let head = QuadratureRule::gauss_jacobi_left(30, beta - 1.0, 0.0, 2.0)?;
    let mut total = head.integrate(f);
    let mut lo = 2.0;
    let stop = 60.0 + (-s).max(0.0) + 10.0 * beta;
    while lo < stop {
        let r = QuadratureRule::gauss_legendre(24, lo, lo + 2.0);
        total += r.integrate(|y| y.powf(beta - 1.0) * f(y));
        lo += 2.0;
    }
    Ok(total)
}

/// `F_beta(s)`; polylog identity for `s > 0`, quadrature otherwise.
pub fn f_beta(beta: f64, s: f64) -> Result<f64> {
    if s > 0.0 {
        f_beta_polylog(beta, s)
    } else {
        f_beta_quadrature(beta, s)
    }
}

/// Numeric value and leading-order prediction of a log-logistic integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticIntegral {
    pub numeric: f64,
    pub prediction: f64,
}

impl AsymptoticIntegral {
    pub fn ratio(&self) -> f64 {
        self.numeric / self.prediction
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// `I_t(s) = int_0^delta x^beta f(x) log(1 + e^{-s - t q(x)}) dx` together with
/// `f(0) / (m q0^{(beta+1)/m}) t^{-(beta+1)/m} F_{(beta+1)/m - 1}(s)`.
///
/// `q` is a polynomial given by ascending coefficients; its lowest nonzero
/// power is `m` and that coefficient is `q0`.
pub fn laguerre_asymptotic_integral<F: Fn(f64) -> f64>(
    beta: f64,
    f: F,
    q: &[f64],
    t: f64,
    s: f64,
    delta: f64,
) -> Result<AsymptoticIntegral> {
    if !(beta > -1.0) {
        return domain(format!("beta must exceed -1, got {beta}"));
    }
    if !(t > 0.0) || !(delta > 0.0) {
        return domain("t and delta must be positive");
    }
    let m = match q.iter().position(|&c| c != 0.0) {
        Some(m) if m >= 1 => m,
        _ => return domain("q must vanish at 0 and be nonzero"),
    };
    let q0 = q[m];
    if !(q0 > 0.0) {
        return domain("leading coefficient of q must be positive");
    }
    for k in 1..=200 {
        let x = delta * k as f64 / 200.0;
        if !(poly_eval(q, x) > 0.0) {
            return domain(format!("q is not positive at x = {x}"));
        }
    }
    let mf = m as f64;
    let scale = (1.0 / (t * q0)).powf(1.0 / mf);
    let x0 = (0.05 * scale).min(delta);
    let integrand = |x: f64| f(x) * log1p_exp_neg(s + t * poly_eval(q, x));
    let head = QuadratureRule::gauss_jacobi_left(24, beta, 0.0, x0)?;
    let mut numeric = head.integrate(&integrand);
    let mut lo = x0;
    while lo < delta {
        let hi = (lo * 1.5).min(delta);
        let r = QuadratureRule::gauss_legendre(24, lo, hi);
        numeric += r.integrate(|x| x.powf(beta) * integrand(x));
        lo = hi;
    }
    let p = (beta + 1.0) / mf;
    let prediction = f(0.0) / (mf * q0.powf(p)) * t.powf(-p) * f_beta(p - 1.0, s)?;
    Ok(AsymptoticIntegral { numeric, prediction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute(sigma: f64, z: f64, terms: usize) -> f64 {
        (1..=terms).map(|k| z.powi(k as i32) / (k as f64).powf(sigma)).sum()
    }

    #[test]
    fn fermi_dirac_moment_oracles() {
        assert!((fermi_dirac_moment(1.0, 0.0).unwrap() - 2f64.ln()).abs() < 1e-14);
        assert!((fermi_dirac_moment(1.0, -3.0).unwrap() - (1.0 + 3f64.exp()).ln()).abs() < 1e-13);
        for &beta in &[0.5, 1.5, 2.5] {
            for &s in &[0.5, 2.0] {
                let q = fermi_dirac_moment(beta, s).unwrap();
                let li = -gamma_real(beta) * polylog(beta, -(-s).exp()).unwrap();
                assert!((q - li).abs() < 1e-13 * li.abs(), "{beta} {s}: {q} {li}");
            }
        }
        assert!(fermi_dirac_moment(0.0, 1.0).is_err());
    }

    #[test]
    fn zero_argument() {
        assert_eq!(polylog(2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn near_minus_one() {
        // mpmath: polylog(2, -0.999999) = -0.822466340...
        let v = polylog(2.0, -0.999_999).unwrap();
        assert!((v - (-0.822_466_340_276_836_1)).abs() < 1e-13, "{v}");
        assert!((v + PI * PI / 12.0).abs() < 1e-6);
    }

    #[test]
    fn brute_force_series() {
        let z = -(-3f64).exp();
        assert!((polylog(2.5, z).unwrap() - brute(2.5, z, 200)).abs() < 1e-15);
        for &z in &[-0.6, -0.8, -0.95] {
            for &s in &[1.5, 2.0, 3.5] {
                let b = brute(s, z, 20_000);
                assert!((polylog(s, z).unwrap() - b).abs() < 1e-13, "s={s} z={z}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(polylog(2.0, -1.0).is_err());
        assert!(polylog(2.0, 0.1).is_err());
        assert!(f_beta(-1.0, 1.0).is_err());
    }

    #[test]
    fn f_beta_routes_agree() {
        for &b in &[-0.5, 0.0, 1.5] {
            for &s in &[0.5, 1.0, 3.0] {
                let a = f_beta_quadrature(b, s).unwrap();
                let c = f_beta_polylog(b, s).unwrap();
                assert!((a - c).abs() < 1e-10, "beta={b} s={s}: {a} vs {c}");
            }
        }
    }

    #[test]
    fn f_beta_limits() {
        assert!((f_beta(0.0, 1e-8).unwrap() - PI * PI / 12.0).abs() < 1e-7);
        let s = 30.0;
        assert!((f_beta(0.0, s).unwrap() / (-s).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_integral_examples() {
        // linear q: exact change of variables up to an exponentially small tail
        let r = laguerre_asymptotic_integral(0.0, |_| 1.0, &[0.0, 1.0], 1e3, 0.5, 1.0).unwrap();
        assert!((r.numeric - f_beta(0.0, 0.5).unwrap() / 1e3).abs() < 1e-14);
        let r = laguerre_asymptotic_integral(0.0, |_| 1.0, &[0.0, 0.0, 1.0], 1e4, 1.0, 1.0).unwrap();
        assert!((r.ratio() - 1.0).abs() < 0.01);
        let r = laguerre_asymptotic_integral(0.0, |x| 1.0 + x, &[0.0, 1.0], 1e6, 1.0, 1.0).unwrap();
        assert!((r.ratio() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn asymptotic_integral_rejects_nonpositive_q() {
        assert!(laguerre_asymptotic_integral(0.0, |_| 1.0, &[0.0, 1.0, -2.0], 1e3, 0.0, 1.0).is_err());
    }
}
