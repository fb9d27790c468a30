//! Limiting hard-edge objects: the Bessel kernel, the conditional thinned
//! kernel `K_alpha` and the limiting statistic, by Nyström discretization.
//!
//! In the hard-edge variable `u` (with `x = u / (c_V n^2)`) the classical
//! kernel is `4 J_alpha(4u, 4v)`. The operator is discretized in the reduced
//! kernel `k(u, v) = 4 J_alpha(4u, 4v) / (uv)^{alpha/2}`, which is entire, with a
//! Gauss-Jacobi rule carrying the weight `u^alpha`.

use nalgebra::{Cholesky, DMatrix, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ops::kernel::{KernelKind, KernelTable};
use crate::specfun::bessel::bessel_j_any;
use crate::specfun::quadrature::QuadratureRule;
use crate::symbols::{SParam, ThinningScale};

/// Default Nyström order.
pub const DEFAULT_ORDER: usize = 80;

/// Bessel kernel `J_alpha(u, v)` with argument `sqrt(u)`, `u, v > 0`.
pub fn bessel_kernel(alpha: f64, u: f64, v: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return domain(format!("alpha must exceed -1, got {alpha}"));
    }
    if !(u > 0.0) || !(v > 0.0) {
        return domain(format!("Bessel kernel needs u, v > 0, got ({u}, {v})"));
    }
    // J_alpha(u, v) = (1/4) * hard_edge(u/4, v/4) written in r = sqrt(u)
    let ru = u.sqrt();
    let rv = v.sqrt();
    if (u - v).abs() <= 1e-7 * u.max(v) {
        let r = (0.5 * (u + v)).sqrt();
        let ja = bessel_j_any(alpha, r);
        return Ok(0.25 * (ja * ja - bessel_j_any(alpha + 1.0, r) * bessel_j_any(alpha - 1.0, r)));
    }
    let (fu, gu) = (bessel_j_any(alpha, ru), r_dj(alpha, ru));
    let (fv, gv) = (bessel_j_any(alpha, rv), r_dj(alpha, rv));
    Ok((fu * gv - gu * fv) / (2.0 * (u - v)))
}

/// `r J'_alpha(r) = r J_{alpha-1}(r) - alpha J_alpha(r)`.
fn r_dj(alpha: f64, r: f64) -> f64 {
    r * bessel_j_any(alpha - 1.0, r) - alpha * bessel_j_any(alpha, r)
}

/// Bessel kernel in the hard-edge variable, `4 J_alpha(4u, 4v)`: the
/// `s -> inf` limit of `K_alpha` and of the scaled finite-n kernel.
pub fn hard_edge_bessel_kernel(alpha: f64, u: f64, v: f64) -> Result<f64> {
    Ok(4.0 * bessel_kernel(alpha, 4.0 * u, 4.0 * v)?)
}

/// Per-point data for the reduced kernel.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    u: f64,
    /// `J_alpha(2 sqrt u) / u^{alpha/2}`
    f: f64,
    /// `r J'_alpha(r) / u^{alpha/2}` at `r = 2 sqrt u`
    g: f64,
    /// `k(u, u)`
    d: f64,
}

impl Reduced {
    fn new(alpha: f64, u: f64) -> Self {
        let r = 2.0 * u.sqrt();
        let p = u.powf(-0.5 * alpha);
        let ja = bessel_j_any(alpha, r);
        let d = (ja * ja - bessel_j_any(alpha + 1.0, r) * bessel_j_any(alpha - 1.0, r)) * p * p;
        Reduced {
            u,
            f: ja * p,
            g: r_dj(alpha, r) * p,
            d,
        }
    }

    fn kernel(&self, o: &Reduced) -> f64 {
        if (self.u - o.u).abs() <= 1e-7 * self.u.max(o.u) {
            return 0.5 * (self.d + o.d);
        }
        (self.f * o.g - self.g * o.f) / (2.0 * (self.u - o.u))
    }
}

/// Nyström discretization of `(1 - sigma) 4J_alpha(4., 4.)` on `[0, U_max]`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub alpha: f64,
    pub scale: ThinningScale,
    pub s: SParam,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `W^{1/2} k W^{1/2}`
    pub matrix: DMatrix<f64>,
    /// `sigma` at the nodes.
    pub symbol: Vec<f64>,
    /// `1 - sigma` at the nodes.
    pub complement: Vec<f64>,
    reduced: Vec<Reduced>,
    factor: Cholesky<f64, Dyn>,
}

/// Truncation point where `1 - sigma < e^{-40}`: `(x^2/4)(40 + |s|)^{1/m}`.
pub fn default_u_max(scale: &ThinningScale, s: SParam) -> f64 {
    let lvl = 40.0 + s.finite().map(f64::abs).unwrap_or(0.0);
    (scale.u_param.recip() * lvl).powf(1.0 / scale.m as f64)
}

impl DiscreteOperator {
    pub fn new(alpha: f64, scale: ThinningScale, s: SParam, order: usize) -> Result<Self> {
        Self::with_domain(alpha, scale, s, order, default_u_max(&scale, s))
    }

    pub fn with_domain(alpha: f64, scale: ThinningScale, s: SParam, order: usize, u_max: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return domain(format!("alpha must exceed -1, got {alpha}"));
        }
        let rule = QuadratureRule::gauss_jacobi_left(order, alpha, 0.0, u_max)?;
        let reduced: Vec<Reduced> = rule.nodes.iter().map(|&u| Reduced::new(alpha, u)).collect();
        let n = rule.len();
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let matrix = DMatrix::from_fn(n, n, |i, j| sw[i] * reduced[i].kernel(&reduced[j]) * sw[j]);
        let symbol: Vec<f64> = rule.nodes.iter().map(|&u| scale.symbol(u, s)).collect();
        let complement: Vec<f64> = rule.nodes.iter().map(|&u| scale.symbol_complement(u, s)).collect();
        let sq: Vec<f64> = complement.iter().map(|c| c.sqrt()).collect();
        let i_minus_b = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - sq[i] * matrix[(i, j)] * sq[j]
        });
        let factor = Cholesky::new(i_minus_b).ok_or_else(|| {
            Error::SingularResolvent("symbol too aggressive; shrink domain or raise s".into())
        })?;
        Ok(DiscreteOperator {
            alpha,
            scale,
            s,
            nodes: rule.nodes,
            weights: rule.weights,
            matrix,
            symbol,
            complement,
            reduced,
            factor,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `log det(I - (1 - sigma) K)`.
    pub fn log_det(&self) -> f64 {
        let l = self.factor.l_dirty();
        2.0 * (0..self.order()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    /// `det(I - (1 - sigma) K)`.
    pub fn fredholm_det(&self) -> f64 {
        self.log_det().exp()
    }

    /// `sqrt(w_i) sqrt(1 - sigma_i) k(y, u_i)` for each node.
    fn row(&self, y: &Reduced) -> Vec<f64> {
        self.reduced
            .iter()
            .enumerate()
            .map(|(i, r)| self.weights[i].sqrt() * self.complement[i].sqrt() * y.kernel(r))
            .collect()
    }

    /// Resolvent kernel `R = J (I - (1 - sigma) J)^{-1}` divided by `(uv)^{alpha/2}`
    /// on a grid, by Nyström interpolation.
    fn reduced_resolvent(&self, grid: &[f64]) -> Vec<Vec<f64>> {
        let pts: Vec<Reduced> = grid.iter().map(|&u| Reduced::new(self.alpha, u)).collect();
        let n = self.order();
        let p = pts.len();
        let rows = DMatrix::from_fn(n, p, |i, a| {
            let r = self.row(&pts[a]);
            r[i]
        });
        let solved = self.factor.solve(&rows);
        let corr = rows.transpose() * solved;
        (0..p)
            .map(|a| (0..p).map(|b| pts[a].kernel(&pts[b]) + corr[(a, b)]).collect())
            .collect()
    }

    /// `K_alpha(u, v) = sqrt(sigma(u)) R(u, v) sqrt(sigma(v))` on a grid of `u > 0`.
    pub fn conditional_kernel_table(&self, grid: &[f64]) -> Result<KernelTable> {
        if grid.iter().any(|&u| !(u > 0.0)) {
            return domain("kernel grid must be positive");
        }
        let rho = self.reduced_resolvent(grid);
        let fac: Vec<f64> = grid
            .iter()
            .map(|&u| self.scale.symbol(u, self.s).sqrt() * u.powf(0.5 * self.alpha))
            .collect();
        let p = grid.len();
        let mut values = vec![vec![0.0; p]; p];
        for a in 0..p {
            for b in a..p {
                let v = 0.5 * (rho[a][b] + rho[b][a]) * fac[a] * fac[b];
                values[a][b] = v;
                values[b][a] = v;
            }
        }
        Ok(KernelTable {
            grid: grid.to_vec(),
            values,
            kind: KernelKind::ConditionalThinned,
        })
    }

    /// `K_alpha(u, v)` at one pair.
    pub fn conditional_kernel(&self, u: f64, v: f64) -> Result<f64> {
        let t = self.conditional_kernel_table(&[u, v])?;
        Ok(t.values[0][1])
    }

    /// Reduced resolvent diagonal `rho(u_i, u_i)` at the nodes, from
    /// `W^{1/2} rho W^{1/2} = A + (SA)^T (I - B)^{-1} (SA)`.
    pub fn resolvent_diagonal_at_nodes(&self) -> Vec<f64> {
        let n = self.order();
        let sq: Vec<f64> = self.complement.iter().map(|c| c.sqrt()).collect();
        let sa = DMatrix::from_fn(n, n, |i, j| sq[i] * self.matrix[(i, j)]);
        let x = self.factor.solve(&sa);
        (0..n)
            .map(|i| {
                let mut c = 0.0;
                for k in 0..n {
                    c += sa[(k, i)] * x[(k, i)];
                }
                (self.matrix[(i, i)] + c) / self.weights[i]
            })
            .collect()
    }

    /// `K_alpha(u_i, u_i)` at the nodes.
    pub fn conditional_diagonal_at_nodes(&self) -> Vec<f64> {
        self.resolvent_diagonal_at_nodes()
            .iter()
            .enumerate()
            .map(|(i, r)| self.symbol[i] * r * self.nodes[i].powf(self.alpha))
            .collect()
    }
}

/// Samples `K_alpha(u, v | s, x)` on a grid.
pub fn conditional_thinned_kernel(alpha: f64, scale: ThinningScale, s: SParam, grid: &[f64]) -> Result<KernelTable> {
    DiscreteOperator::new(alpha, scale, s, DEFAULT_ORDER)?.conditional_kernel_table(grid)
}

/// Samples the hard-edge Bessel kernel `4 J_alpha(4u, 4v)` on a grid.
pub fn bessel_kernel_table(alpha: f64, grid: &[f64]) -> Result<KernelTable> {
    KernelTable::tabulate(grid, KernelKind::Bessel, |u, v| hard_edge_bessel_kernel(alpha, u, v))
}

/// `det(I - (1 - sigma) K)` at order `order` and `2 order`; errors if they differ by more than `tol`.
pub fn fredholm_det_converged(alpha: f64, scale: ThinningScale, s: SParam, order: usize, tol: f64) -> Result<f64> {
    let a = DiscreteOperator::new(alpha, scale, s, order)?.log_det();
    let b = DiscreteOperator::new(alpha, scale, s, 2 * order)?.log_det();
    if (a.exp() - b.exp()).abs() > tol {
        return Err(Error::NoConvergence(format!(
            "Fredholm determinant not converged: {} at order {order}, {} at order {}",
            a.exp(),
            b.exp(),
            2 * order
        )));
    }
    Ok(b)
}

/// `log L_alpha^(Bes)` by the determinant and trace routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitingStatistic {
    pub log_l_det: f64,
    pub log_l_trace: f64,
    /// Estimated size of the discarded outer-integral tail in the trace route.
    pub trace_tail: f64,
}

/// Outer rule for the trace route: Gauss-Legendre with 24 nodes per 40-unit window.
pub const TRACE_NODES: usize = 24;

/// `u -> int K_alpha(z, z | u) d/du log sigma(z | u) dz`, on the fixed Nyström domain.
pub fn trace_integrand(alpha: f64, scale: ThinningScale, u: f64, order: usize, u_max: f64) -> Result<f64> {
    let op = DiscreteOperator::with_domain(alpha, scale, SParam::Finite(u), order, u_max)?;
    let rho = op.resolvent_diagonal_at_nodes();
    Ok(op
        .nodes
        .iter()
        .zip(&op.weights)
        .zip(&rho)
        .map(|((&z, &w), &r)| w * scale.symbol_ds(z, u) * r)
        .sum())
}

/// Limiting statistic at `(alpha, x, s)` by both routes.
pub fn limiting_statistic(alpha: f64, scale: ThinningScale, s: SParam) -> Result<LimitingStatistic> {
    limiting_statistic_with_order(alpha, scale, s, DEFAULT_ORDER)
}

pub fn limiting_statistic_with_order(
    alpha: f64,
    scale: ThinningScale,
    s: SParam,
    order: usize,
) -> Result<LimitingStatistic> {
    let s0 = match s {
        SParam::PlusInfinity => {
            return Ok(LimitingStatistic {
                log_l_det: 0.0,
                log_l_trace: 0.0,
                trace_tail: 0.0,
            })
        }
        SParam::Finite(s) => s,
    };
    if s0 < -5.0 {
        return domain(format!("s = {s0} below the supported minimum -5"));
    }
    let u_max = default_u_max(&scale, s);
    let det = DiscreteOperator::with_domain(alpha, scale, s, order, u_max)?.log_det();
    let mut lo = s0;
    let mut acc = 0.0;
    let mut tail;
    loop {
        let rule = QuadratureRule::gauss_legendre(TRACE_NODES, lo, lo + 40.0);
        for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * trace_integrand(alpha, scale, u, order, u_max)?;
        }
        lo += 40.0;
        tail = trace_integrand(alpha, scale, lo, order, u_max)?;
        if tail <= 1e-10 {
            break;
        }
        if lo - s0 > 400.0 {
            return Err(Error::NoConvergence("trace-route outer integral does not decay".into()));
        }
    }
    Ok(LimitingStatistic {
        log_l_det: det,
        log_l_trace: -acc,
        trace_tail: tail,
    })
}

/// `det(I - 4J_alpha(4., 4.))` on `(0, u_max)` in the hard-edge variable:
/// the probability of no particle there.
pub fn bessel_gap_probability(alpha: f64, u_max: f64, order: usize) -> Result<f64> {
    if !(alpha > -1.0) || !(u_max > 0.0) {
        return domain(format!("bad gap parameters alpha={alpha}, u_max={u_max}"));
    }
    let rule = QuadratureRule::gauss_jacobi_left(order, alpha, 0.0, u_max)?;
    let reduced: Vec<Reduced> = rule.nodes.iter().map(|&u| Reduced::new(alpha, u)).collect();
    let n = rule.len();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - sw[i] * reduced[i].kernel(&reduced[j]) * sw[j]
    });
    Ok(m.determinant())
}
