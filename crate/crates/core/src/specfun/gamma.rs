//! Gamma function and relatives on the real line.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gamma function for real `x`, valid away from the poles at `0, -1, -2, ...`.
///
/// Poles return `inf` with the sign of the limit from the right.
pub fn gamma_real(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_real(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    // exact factorials for small integers
    if x == x.round() && x <= 23.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(y + 0.5) * (-t).exp() * lanczos_sum(y)
}

/// Gamma function restricted to `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("gamma requires x > 0, got {x}"));
    }
    Ok(gamma_real(x))
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("ln_gamma requires x > 0, got {x}"));
    }
    if x < 0.5 {
        // reflection keeps full accuracy near 0
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    if x < 20.0 {
        return Ok(gamma_real(x).ln());
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + lanczos_sum(y).ln())
}

/// Reciprocal gamma function, entire; zero at the poles of gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else if x > 171.0 {
        (-ln_gamma(x).unwrap_or(f64::INFINITY)).exp()
    } else {
        1.0 / gamma_real(x)
    }
}

/// Digamma at positive integers, psi(n) = -euler_gamma + H_{n-1}.
pub fn digamma_int(n: u32) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let mut h = 0.0;
    for k in 1..n {
        h += 1.0 / k as f64;
    }
    h - EULER
}

/// `(x)_k = x (x+1) ... (x+k-1)`.
pub fn pochhammer(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (x + j as f64))
}

/// Central binomial coefficient normalised by `4^k`: `binom(2k, k) / 4^k`.
pub fn central_binomial_over_4k(k: usize) -> f64 {
    let mut c = 1.0;
    for j in 1..=k {
        c *= (2 * j - 1) as f64 / (2 * j) as f64;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_values() {
        assert!(rel(gamma(0.5).unwrap(), 1.772_453_850_905_516) < 1e-13);
        assert!(rel(gamma(1.5).unwrap(), 0.886_226_925_452_758) < 1e-13);
        assert!(rel(gamma_real(-0.5), -3.544_907_701_811_032) < 1e-13);
    }

    #[test]
    fn factorials_and_recurrence() {
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        for &x in &[0.1, 0.37, 1.2, 2.9, 7.3, 15.5, 33.3] {
            let lhs = gamma_real(x + 1.0);
            let rhs = x * gamma_real(x);
            assert!(rel(lhs, rhs) < 5e-14, "x={x}");
        }
    }

    #[test]
    fn reference_values() {
        // values from mpmath at 30 digits
        assert!(rel(gamma_real(0.1), 9.513_507_698_668_73) < 1e-13);
        assert!(rel(gamma_real(2.5), 1.329_340_388_179_137) < 1e-13);
        assert!(rel(gamma_real(10.1), 454_760.751_441_585_6) < 1e-13);
        assert!(rel(ln_gamma(100.0).unwrap(), 359.134_205_369_575_4) < 1e-13);
        assert!(rel(gamma_real(-1.5), 2.363_271_801_207_355) < 1e-13);
    }

    #[test]
    fn nonpositive_is_domain_error() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.0).is_err());
        assert_eq!(rgamma(-3.0), 0.0);
        assert_eq!(rgamma(0.0), 0.0);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.01, 0.3, 1.7, 19.9, 20.1, 50.0] {
            assert!((ln_gamma(x).unwrap() - gamma_real(x).ln()).abs() < 1e-13 * gamma_real(x).ln().abs().max(1.0));
        }
    }

    #[test]
    fn central_binomials() {
        assert_eq!(central_binomial_over_4k(0), 1.0);
        assert_eq!(central_binomial_over_4k(1), 0.5);
        assert_eq!(central_binomial_over_4k(2), 0.375);
    }
}
