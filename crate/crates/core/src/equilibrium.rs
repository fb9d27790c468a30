//! Equilibrium measure of `[0, inf)` in a polynomial external field.
//!
//! One-cut ansatz with a hard edge at 0: `C(z) + V'(z)/2 = sqrt((z-a)/z) h(z)`,
//! with `h` the polynomial part of `sqrt(z/(z-a)) V'(z)/2` at infinity and `a`
//! fixed by `C(z) = -1/z + O(z^-2)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma::central_binomial_over_4k;
use crate::specfun::polylog::{f_beta, log1p_exp_neg};
use crate::specfun::quadrature::QuadratureRule;
use crate::symbols::{poly_derivative, poly_eval, ModelConfig, SParam, ThinningScale};

/// Equilibrium data for a one-cut regular potential with support `[0, a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub a: f64,
    pub h_coeffs: Vec<f64>,
    pub kappa0: f64,
    #[serde(rename = "c_V")]
    pub c_v: f64,
    #[serde(rename = "ell_V")]
    pub ell_v: f64,
    #[serde(rename = "V_coeffs")]
    pub v_coeffs: Vec<f64>,
}

fn normalization_defect(v: &[f64], a: f64) -> f64 {
    v.iter()
        .enumerate()
        .map(|(j, c)| c * central_binomial_over_4k(j + 1) * a.powi(j as i32 + 1))
        .sum::<f64>()
        - 1.0
}

fn h_from(v: &[f64], a: f64) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            (i..v.len())
                .map(|j| v[j] * central_binomial_over_4k(j - i) * a.powi((j - i) as i32))
                .sum()
        })
        .collect()
}

/// Neville extrapolation of the samples `(x_k, y_k)` to `x = 0`.
fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for lvl in 1..n {
        for i in 0..n - lvl {
            p[i] = (xs[i + lvl] * p[i] - xs[i] * p[i + 1]) / (xs[i + lvl] - xs[i]);
        }
    }
    p[0]
}

/// Solves for the equilibrium measure and checks one-cut regularity.
pub fn solve_equilibrium(v_coeffs: &[f64]) -> Result<EquilibriumData> {
    let deg = v_coeffs.iter().rposition(|&c| c != 0.0);
    match deg {
        Some(d) if d >= 1 && v_coeffs[d] > 0.0 => {}
        _ => return Err(Error::Config("V needs a positive leading coefficient and degree >= 1".into())),
    }
    let v: Vec<f64> = poly_derivative(&v_coeffs[..=deg.unwrap()])
        .iter()
        .map(|c| 0.5 * c)
        .collect();

    // bracket the normalization root
    let mut hi = 1.0;
    let mut tries = 0;
    while normalization_defect(&v, hi) <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::NotOneCut("normalization defect never changes sign".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if normalization_defect(&v, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    let a = 0.5 * (lo + hi);
    if !(a > 0.0) || normalization_defect(&v, a).abs() > 1e-10 {
        return Err(Error::NotOneCut(format!("normalization root not found (a = {a})")));
    }
    let h = h_from(&v, a);

    for k in 0..=4000 {
        let x = a * k as f64 / 4000.0;
        if !(poly_eval(&h, x) > 0.0) {
            return Err(Error::NotRegular(format!("density vanishes or changes sign near x = {x}")));
        }
    }

    let xs: Vec<f64> = [1e-4, 1e-5, 1e-6].iter().map(|f| f * a).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| (a - x).sqrt() * poly_eval(&h, x) / PI).collect();
    let kappa0 = extrapolate_to_zero(&xs, &ys);
    let c_v = PI * PI * kappa0 * kappa0;

    let mut eq = EquilibriumData {
        a,
        h_coeffs: h,
        kappa0,
        c_v,
        ell_v: 0.0,
        v_coeffs: v_coeffs.to_vec(),
    };
    let xm = 0.5 * a;
    eq.ell_v = eq.log_potential(xm) - 0.5 * poly_eval(v_coeffs, xm);

    for k in 1..=400 {
        let x = a * (1.0 + 9.0 * k as f64 / 400.0);
        if !(eq.el_residual(x) > 0.0) {
            return Err(Error::NotRegular(format!(
                "Euler-Lagrange inequality fails at x = {x}"
            )));
        }
    }
    Ok(eq)
}

impl EquilibriumData {
    pub fn h(&self, x: f64) -> f64 {
        poly_eval(&self.h_coeffs, x)
    }

    /// `mu'(x) = (1/pi) sqrt((a - x)/x) |h(x)|` on `(0, a)`, zero elsewhere.
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.a {
            return 0.0;
        }
        ((self.a - x) / x).sqrt() * self.h(x).abs() / PI
    }

    /// Cosine coefficients of `g(theta) = (a/2pi)(1 + cos theta) h(a(1 - cos theta)/2)`,
    /// the density in the angle variable.
    pub fn angular_coefficients(&self) -> Vec<f64> {
        let deg = self.h_coeffs.len() + 1;
        let n = 2 * deg + 8;
        let g = |th: f64| {
            let c = th.cos();
            self.a / (2.0 * PI) * (1.0 + c) * self.h(0.5 * self.a * (1.0 - c))
        };
        let samples: Vec<f64> = (0..=n).map(|j| g(PI * j as f64 / n as f64)).collect();
        (0..=deg)
            .map(|k| {
                let mut s = 0.0;
                for (j, v) in samples.iter().enumerate() {
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += w * v * (PI * (k * j) as f64 / n as f64).cos();
                }
                let scale = if k == 0 { 1.0 } else { 2.0 };
                scale * s / n as f64
            })
            .collect()
    }

    /// Logarithmic potential `U(x) = int log|x - y| dmu(y)` for real `x >= 0`.
    pub fn log_potential(&self, x: f64) -> f64 {
        let g = self.angular_coefficients();
        let a = self.a;
        let base = (0.5 * a).ln();
        let c = 1.0 - 2.0 * x / a;
        if c.abs() <= 1.0 {
            let phi = c.acos();
            let mut u = base - PI * g[0] * 2f64.ln();
            for (k, gk) in g.iter().enumerate().skip(1) {
                u -= PI * gk * (k as f64 * phi).cos() / k as f64;
            }
            u
        } else {
            // x > a: cos(theta) - c with c = -cosh(eta)
            let eta = (-c).acosh();
            let mut u = base + PI * g[0] * (eta - 2f64.ln());
            for (k, gk) in g.iter().enumerate().skip(1) {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                u += PI * gk * sign * (-(k as f64) * eta).exp() / k as f64;
            }
            u
        }
    }

    /// `-U(x) + V(x)/2 + ell_V`: zero on the support, positive beyond it.
    pub fn el_residual(&self, x: f64) -> f64 {
        -self.log_potential(x) + 0.5 * poly_eval(&self.v_coeffs, x) + self.ell_v
    }

    /// Effective potential `2U(x) - V(x)`, constant on the support.
    pub fn effective_potential(&self, x: f64) -> f64 {
        2.0 * self.log_potential(x) - poly_eval(&self.v_coeffs, x)
    }

    /// `phi(x)` on the real axis off the support: negative for `x < 0`,
    /// positive for `x > a`.
    pub fn phi_real(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            // y = -r^2
            let r = QuadratureRule::panels(&[0.0, 0.5 * (-x).sqrt(), (-x).sqrt()], 32);
            Ok(-r.integrate(|r| 2.0 * (r * r + self.a).sqrt() * self.h(-r * r)))
        } else if x > self.a {
            // y = a + r^2
            let top = (x - self.a).sqrt();
            let r = QuadratureRule::panels(&[0.0, 0.5 * top, top], 32);
            Ok(r.integrate(|r| 2.0 * r * r * self.h(self.a + r * r) / (self.a + r * r).sqrt()))
        } else {
            Err(Error::Domain(format!("phi is two-valued on the support, x = {x}")))
        }
    }

    /// `psi = phi^2 / 4`; `psi(z)/(-z) -> c_V` as `z -> 0-`.
    pub fn psi_real(&self, x: f64) -> Result<f64> {
        let p = self.phi_real(x)?;
        Ok(0.25 * p * p)
    }

    /// Smallest `x > a` with `n phi(x) >= level`.
    pub fn exterior_cutoff(&self, n: usize, level: f64) -> Result<f64> {
        let target = level / n as f64;
        let mut hi = self.a * 1.5;
        while self.phi_real(hi)? < target {
            hi = self.a + 2.0 * (hi - self.a);
            if hi > 1e12 {
                return Err(Error::NoConvergence("exterior cutoff not found".into()));
            }
        }
        let mut lo = self.a;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.phi_real(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// Scaling constants for a model with this equilibrium measure.
pub fn thinning_scale(eq: &EquilibriumData, t: f64, m: u32) -> ThinningScale {
    ThinningScale::new(eq.c_v, t, m)
}

/// Global-parametrix constant and its asymptotic comparator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P0Value {
    pub p0: f64,
    /// `p_inf(s)`, the limit of `n p0`.
    pub p_inf: f64,
}

/// `p0 = -(1/2pi) int_0^a log sigma_n(x) / sqrt(x (a - x)) dx`.
pub fn p0_global_parametrix(cfg: &ModelConfig, eq: &EquilibriumData) -> Result<P0Value> {
    let s = match cfg.s {
        SParam::PlusInfinity => return Ok(P0Value { p0: 0.0, p_inf: 0.0 }),
        SParam::Finite(s) => s,
    };
    let a = eq.a;
    let mf = cfg.m as f64;
    // with x = a (1 - cos theta)/2 the measure becomes d theta
    let n2m = (cfg.n as f64).powi(2 * cfg.m as i32);
    let x_t = (1.0 / (n2m * cfg.t)).powf(1.0 / mf);
    let theta_t = 2.0 * (x_t / a).sqrt();
    let mut breaks = vec![0.0];
    let mut th = 0.05 * theta_t;
    while th < PI {
        breaks.push(th);
        th *= 1.4;
    }
    breaks.push(PI);
    let rule = QuadratureRule::panels(&breaks, 24);
    let f = |th: f64| {
        let x = 0.5 * a * (1.0 - th.cos());
        log1p_exp_neg(s + n2m * cfg.q(x))
    };
    let p0 = rule.integrate(f) / (2.0 * PI);
    // coarse rule for a convergence estimate
    let coarse = QuadratureRule::panels(&breaks, 16).integrate(f) / (2.0 * PI);
    if (coarse - p0).abs() > 1e-9 * p0.abs().max(1e-300) && (coarse - p0).abs() > 1e-300 {
        return Err(Error::Quadrature(format!(
            "p0 quadrature not converged: residual {:e}",
            (coarse - p0).abs()
        )));
    }
    let p_inf = a.powf(-0.5) * cfg.t.powf(-1.0 / (2.0 * mf)) / (2.0 * PI * mf)
        * f_beta(1.0 / (2.0 * mf) - 1.0, s)?;
    Ok(P0Value { p0, p_inf })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `int f dmu` with Jacobi panels absorbing both endpoint singularities.
    fn split_integral(eq: &EquilibriumData, f: impl Fn(f64) -> f64) -> f64 {
        let a = eq.a;
        let left = QuadratureRule::gauss_jacobi_left(40, -0.5, 0.0, 0.5 * a).unwrap();
        let right = QuadratureRule::gauss_jacobi_left(40, 0.5, 0.0, 0.5 * a).unwrap();
        left.integrate(|x| f(x) * (a - x).sqrt() * eq.h(x) / PI)
            + right.integrate(|y| f(a - y) * eq.h(a - y) / ((a - y).sqrt() * PI))
    }

    #[test]
    fn marchenko_pastur() {
        let eq = solve_equilibrium(&[0.0, 1.0]).unwrap();
        assert!((eq.a - 4.0).abs() < 1e-14);
        assert!((eq.kappa0 - 1.0 / PI).abs() < 1e-12);
        assert!((eq.c_v - 1.0).abs() < 1e-11);
        let x: f64 = 1.3;
        let mp = ((4.0 - x) / x).sqrt() / (2.0 * PI);
        assert!((eq.density(x) - mp).abs() < 1e-15);
        // closed form potential: U(x) = x/2 - 1 on the support
        assert!((eq.log_potential(2.2) - 0.1).abs() < 1e-14);
        assert!((eq.ell_v + 1.0).abs() < 1e-14);
    }

    #[test]
    fn normalization_by_quadrature() {
        for v in [vec![0.0, 1.0], vec![0.0, 0.0, 0.5], vec![0.0, 1.0, 0.3, 0.05]] {
            let eq = solve_equilibrium(&v).unwrap();
            let mass = split_integral(&eq, |_| 1.0);
            assert!((mass - 1.0).abs() < 1e-10, "V={v:?} mass={mass}");
            assert!((PI * eq.angular_coefficients()[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_matches_closed_form() {
        let eq = solve_equilibrium(&[0.0, 0.0, 0.5]).unwrap();
        let closed = eq.a.sqrt() * eq.h(0.0) / PI;
        assert!((eq.kappa0 - closed).abs() < 1e-12 * closed);
        assert!((eq.a - (16.0f64 / 3.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn euler_lagrange_on_and_off_support() {
        for v in [vec![0.0, 1.0], vec![0.0, 0.0, 0.5], vec![1.0, 0.4, 0.2]] {
            let eq = solve_equilibrium(&v).unwrap();
            let e0 = eq.effective_potential(0.5 * eq.a);
            for k in 1..100 {
                let x = eq.a * k as f64 / 100.0;
                assert!((eq.effective_potential(x) - e0).abs() < 1e-7);
            }
            let mut prev = eq.effective_potential(eq.a);
            for k in 1..100 {
                let x = eq.a * (1.0 + 0.05 * k as f64);
                let e = eq.effective_potential(x);
                assert!(e < e0 && e < prev, "V={v:?} x={x}");
                prev = e;
            }
        }
    }

    #[test]
    fn log_potential_against_quadrature() {
        let eq = solve_equilibrium(&[0.0, 1.0, 0.3]).unwrap();
        let x = 1.7 * eq.a;
        let direct = split_integral(&eq, |y| (x - y).ln());
        assert!((eq.log_potential(x) - direct).abs() < 1e-12);
    }

    #[test]
    fn conformal_map_limit() {
        for v in [vec![0.0, 1.0], vec![0.0, 0.0, 0.5]] {
            let eq = solve_equilibrium(&v).unwrap();
            let z = -1e-8;
            let ratio = eq.psi_real(z).unwrap() / -z;
            assert!((ratio - eq.c_v).abs() < 1e-6 * eq.c_v);
            assert!(eq.phi_real(-0.01).unwrap() < 0.0);
            assert!(eq.phi_real(1.2 * eq.a).unwrap() > 0.0);
        }
    }

    #[test]
    fn phi_matches_el_residual_beyond_support() {
        let eq = solve_equilibrium(&[0.0, 1.0, 0.2]).unwrap();
        let x = 1.6 * eq.a;
        assert!((eq.phi_real(x).unwrap() - eq.el_residual(x)).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_failure_is_reported() {
        // V = x^4/4 - 2x^2 ... strongly double-welled on the half line: density dips below zero
        let r = solve_equilibrium(&[0.0, 0.0, -6.0, 0.0, 1.0]);
        assert!(matches!(r, Err(Error::NotRegular(_)) | Err(Error::NotOneCut(_))), "{r:?}");
    }

    #[test]
    fn scale_from_equilibrium() {
        let eq = solve_equilibrium(&[0.0, 1.0]).unwrap();
        let sc = thinning_scale(&eq, 4.0, 1);
        assert!((sc.x_param - 1.0).abs() < 1e-11 && (sc.u_param - 4.0).abs() < 1e-10);
    }

    #[test]
    fn p0_examples() {
        let eq = solve_equilibrium(&[0.0, 1.0]).unwrap();
        let cfg = ModelConfig::laguerre(0.0, 1, 1.0, SParam::PlusInfinity, 20);
        assert_eq!(p0_global_parametrix(&cfg, &eq).unwrap().p0, 0.0);
        let mut last = f64::INFINITY;
        for n in [20, 40, 80] {
            let cfg = ModelConfig::laguerre(0.0, 1, 1.0, SParam::Finite(1.0), n);
            let v = p0_global_parametrix(&cfg, &eq).unwrap();
            let dev = (n as f64 * v.p0 - v.p_inf).abs();
            assert!(dev < last);
            last = dev;
        }
    }
}
