//! Composite quadrature for the varying weight `x^alpha e^{-nV(x)} sigma_n(x)`.
//!
//! Panels: a Gauss-Jacobi panel at the hard edge, geometric panels through the
//! thinning transition, panels uniform in `theta` (`x = a(1 - cos theta)/2`)
//! across the bulk, and panels uniform in `log(n phi)` beyond the soft edge.

use std::f64::consts::PI;

use crate::equilibrium::EquilibriumData;
use crate::error::Result;
use crate::specfun::quadrature::QuadratureRule;
use crate::symbols::{log_sigma_n, ModelConfig, SParam};

/// Tuning of the discretization; defaults give order about `12 n + 600`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationOptions {
    pub nodes_per_panel: usize,
    /// Number of `theta` panels across the bulk; `None` means `max(n/2, 8)`.
    pub theta_panels: Option<usize>,
    /// Ratio of consecutive geometric panels near the hard edge.
    pub hard_ratio: f64,
    /// Truncate the tail where `n phi(x)` reaches this level.
    pub tail_level: f64,
}

impl Default for DiscretizationOptions {
    fn default() -> Self {
        DiscretizationOptions {
            nodes_per_panel: 24,
            theta_panels: None,
            hard_ratio: 1.5,
            tail_level: 40.0,
        }
    }
}

impl DiscretizationOptions {
    /// A finer variant, used to check discretization error.
    pub fn refined(&self) -> Self {
        DiscretizationOptions {
            nodes_per_panel: self.nodes_per_panel + 12,
            theta_panels: self.theta_panels.map(|p| p + p / 2),
            hard_ratio: self.hard_ratio.sqrt(),
            tail_level: self.tail_level + 10.0,
        }
    }
}

/// Nodes with log-weights of the undeformed measure `x^alpha e^{-nV(x)} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl Discretization {
    pub fn new(cfg: &ModelConfig, eq: &EquilibriumData, opts: &DiscretizationOptions) -> Result<Self> {
        let n = cfg.n as f64;
        let q = opts.nodes_per_panel;
        let a = eq.a;
        let p = opts.theta_panels.unwrap_or((cfg.n / 2).max(8));
        let theta: Vec<f64> = (0..=p).map(|k| PI * k as f64 / p as f64).collect();
        let x_of = |th: f64| 0.5 * a * (1.0 - th.cos());
        let x1 = x_of(theta[1]);

        let hard = 1.0 / (eq.c_v * n * n);
        let thin = (1.0 / (n.powi(2 * cfg.m as i32) * cfg.t)).powf(1.0 / cfg.m as f64);
        let x0 = (0.05 * hard.min(thin)).min(0.5 * x1);

        let mut nodes = Vec::new();
        let mut log_w = Vec::new();
        let mut push = |x: f64, w: f64, jacobi: bool| {
            let lw = w.ln() - n * cfg.v(x) + if jacobi { 0.0 } else { cfg.alpha * x.ln() };
            nodes.push(x);
            log_w.push(lw);
        };

        let head = QuadratureRule::gauss_jacobi_left(q, cfg.alpha, 0.0, x0)?;
        for (x, w) in head.nodes.iter().zip(&head.weights) {
            push(*x, *w, true);
        }
        let mut lo = x0;
        while lo < x1 {
            let hi = (lo * opts.hard_ratio).min(x1);
            let hi = if hi > x1 / opts.hard_ratio.sqrt() { x1 } else { hi };
            let r = QuadratureRule::gauss_legendre(q, lo, hi);
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                push(*x, *w, false);
            }
            lo = hi;
        }
        for k in 1..p {
            let r = QuadratureRule::gauss_legendre(q, theta[k], theta[k + 1]);
            for (th, w) in r.nodes.iter().zip(&r.weights) {
                push(x_of(*th), w * 0.5 * a * th.sin(), false);
            }
        }
        // beyond the soft edge: breakpoints at n phi = level 2^k / 4
        let x_max = eq.exterior_cutoff(cfg.n, opts.tail_level)?;
        let mut breaks = vec![a];
        let mut level = 0.25;
        while level < opts.tail_level {
            breaks.push(eq.exterior_cutoff(cfg.n, level)?);
            level *= 2.0;
        }
        breaks.push(x_max);
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let r = QuadratureRule::gauss_legendre(q, w[0], w[1]);
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                push(*x, *w, false);
            }
        }
        Ok(Discretization { nodes, log_weights: log_w })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Log-weights of `x^alpha e^{-nV} sigma_n(x|s)`.
    pub fn deformed_log_weights(&self, cfg: &ModelConfig, s: SParam) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&x, &lw)| lw + log_sigma_n(cfg, x, s))
            .collect()
    }
}

/// `log sum exp`.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
