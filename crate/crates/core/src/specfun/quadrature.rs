//! Gauss rules from three-term recurrences and their affine / rational maps.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::gamma::{gamma_real, ln_gamma};
use super::tridiag::tridiag_eigen;
use crate::error::{Error, Result};

/// Where a rule lives and which weight its weights already absorb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// `[lo, hi]` with unit weight.
    Interval { lo: f64, hi: f64 },
    /// `[lo, hi]` with weight `(x - lo)^exponent` folded into the weights.
    JacobiLeft { lo: f64, hi: f64, exponent: f64 },
    /// `[lo, inf)` through `x = lo + scale * y / (1 - y)`.
    SemiInfinite { lo: f64, scale: f64 },
    /// Concatenation of several rules.
    Composite,
}

/// Nodes and positive weights; `integrate(f)` approximates `int f dmu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: Domain,
}

/// Gauss rule for a measure given by monic recurrence coefficients.
///
/// Nodes start from the Jacobi-matrix eigenvalues, are polished by Newton on
/// the orthonormal polynomial, and weights are Christoffel numbers.
pub fn gauss_from_recurrence(alpha: &[f64], beta: &[f64], mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = alpha.len();
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    if beta.len() + 1 < n {
        return Err(Error::Quadrature("need n-1 beta coefficients".into()));
    }
    let off: Vec<f64> = beta[..n - 1].iter().map(|b| b.sqrt()).collect();
    let eig = tridiag_eigen(alpha, &off, true)?;
    let mut nodes = eig.values;
    let first = eig.first_components.unwrap();
    let mut weights = vec![0.0; n];
    let sb: Vec<f64> = beta.iter().map(|b| b.sqrt()).collect();
    for (i, x) in nodes.iter_mut().enumerate() {
        let gw = mu0 * first[i] * first[i];
        let mut xi = *x;
        for _ in 0..3 {
            let (pn, dpn, _) = orthonormal_eval(alpha, &sb, mu0, xi);
            let step = pn / dpn;
            if !step.is_finite() {
                break;
            }
            xi -= step;
            if step.abs() <= 4.0 * f64::EPSILON * xi.abs().max(1e-300) {
                break;
            }
        }
        // keep the eigenvalue if Newton wandered off
        if (xi - *x).abs() < 1e-6 * (1.0 + x.abs()) {
            *x = xi;
        }
        let (_, _, sumsq) = orthonormal_eval(alpha, &sb, mu0, *x);
        let cw = 1.0 / sumsq;
        weights[i] = if cw.is_finite() && (cw - gw).abs() < 1e-6 * gw.max(1e-300) {
            cw
        } else {
            gw
        };
    }
    Ok((nodes, weights))
}

/// Returns `(p_n(x), p_n'(x), sum_{k<n} p_k(x)^2)` for the orthonormal family.
fn orthonormal_eval(alpha: &[f64], sb: &[f64], mu0: f64, x: f64) -> (f64, f64, f64) {
    let n = alpha.len();
    let mut p_prev = 0.0;
    let mut d_prev = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut d = 0.0;
    let mut sumsq = 0.0;
    for k in 0..n {
        sumsq += p * p;
        let b_prev = if k == 0 { 0.0 } else { sb[k - 1] };
        let b_next = if k < sb.len() { sb[k] } else { 1.0 };
        let p_next = ((x - alpha[k]) * p - b_prev * p_prev) / b_next;
        let d_next = ((x - alpha[k]) * d + p - b_prev * d_prev) / b_next;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d, sumsq)
}

/// Monic Jacobi recurrence for `(1 - x)^a (1 + x)^b` on `[-1, 1]`.
pub fn jacobi_recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let ab = a + b;
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        alpha.push(if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        });
        let kf = kf + 1.0;
        beta.push(if k == 0 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab)
                / ((2.0 * kf + ab).powi(2) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0))
        });
    }
    let mu0 = if ab + 2.0 < 150.0 {
        2f64.powf(ab + 1.0) * gamma_real(a + 1.0) * gamma_real(b + 1.0) / gamma_real(ab + 2.0)
    } else {
        ((ab + 1.0) * 2f64.ln() + ln_gamma(a + 1.0).unwrap() + ln_gamma(b + 1.0).unwrap()
            - ln_gamma(ab + 2.0).unwrap())
        .exp()
    };
    (alpha, beta, mu0)
}

/// Cached Gauss-Legendre rule on `[-1, 1]`.
pub fn legendre_reference(n: usize) -> (&'static [f64], &'static [f64]) {
    type Cache = Mutex<HashMap<usize, (&'static [f64], &'static [f64])>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return *r;
    }
    let (a, b, mu0) = jacobi_recurrence(n, 0.0, 0.0);
    let (x, w) = gauss_from_recurrence(&a, &b, mu0).expect("legendre rule");
    // enforce exact symmetry
    let mut xs = x.clone();
    let mut ws = w.clone();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let xm = 0.5 * (x[j] - x[i]);
        let wm = 0.5 * (w[i] + w[j]);
        xs[i] = -xm;
        xs[j] = xm;
        ws[i] = wm;
        ws[j] = wm;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    let entry: (&'static [f64], &'static [f64]) = (Box::leak(xs.into_boxed_slice()), Box::leak(ws.into_boxed_slice()));
    cache.lock().unwrap().insert(n, entry);
    entry
}

impl QuadratureRule {
    /// Gauss-Legendre with `n` nodes on `[lo, hi]`.
    pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Self {
        let (x, w) = legendre_reference(n);
        let h = 0.5 * (hi - lo);
        QuadratureRule {
            nodes: x.iter().map(|t| lo + h * (t + 1.0)).collect(),
            weights: w.iter().map(|w| h * w).collect(),
            domain: Domain::Interval { lo, hi },
        }
    }

    /// Gauss-Jacobi for `int_lo^hi (x - lo)^exponent f(x) dx`, `exponent > -1`.
    pub fn gauss_jacobi_left(n: usize, exponent: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(exponent > -1.0) {
            return Err(Error::Domain(format!("Jacobi exponent must exceed -1, got {exponent}")));
        }
        let (a, b, mu0) = jacobi_recurrence(n, 0.0, exponent);
        let (x, w) = gauss_from_recurrence(&a, &b, mu0)?;
        let h = 0.5 * (hi - lo);
        let scale = h.powf(exponent + 1.0);
        Ok(QuadratureRule {
            nodes: x.iter().map(|t| lo + h * (t + 1.0)).collect(),
            weights: w.iter().map(|w| scale * w).collect(),
            domain: Domain::JacobiLeft { lo, hi, exponent },
        })
    }

    /// Composite Gauss-Legendre in `y` for `x = lo + scale * y / (1 - y)`.
    pub fn semi_infinite(n_per_panel: usize, panels: usize, lo: f64, scale: f64) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in 0..panels {
            let y0 = p as f64 / panels as f64;
            let y1 = (p + 1) as f64 / panels as f64;
            let r = Self::gauss_legendre(n_per_panel, y0, y1);
            for (y, w) in r.nodes.iter().zip(&r.weights) {
                let om = 1.0 - y;
                nodes.push(lo + scale * y / om);
                weights.push(w * scale / (om * om));
            }
        }
        QuadratureRule {
            nodes,
            weights,
            domain: Domain::SemiInfinite { lo, scale },
        }
    }

    /// Concatenates rules over adjacent pieces.
    pub fn composite(parts: Vec<QuadratureRule>) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for p in parts {
            nodes.extend(p.nodes);
            weights.extend(p.weights);
        }
        QuadratureRule {
            nodes,
            weights,
            domain: Domain::Composite,
        }
    }

    /// Gauss-Legendre panels between consecutive breakpoints.
    pub fn panels(breaks: &[f64], n_per_panel: usize) -> Self {
        let parts = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| Self::gauss_legendre(n_per_panel, w[0], w[1]))
            .collect();
        Self::composite(parts)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Total mass of the rule, i.e. the integral of `1`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}
