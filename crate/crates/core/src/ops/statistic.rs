//! The multiplicative statistic `L_n(s) = Z_n(s) / Z_n(inf)` by three routes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::discretize::{Discretization, DiscretizationOptions};
use super::recurrence::{build_recurrence, RecurrenceTable};
use crate::equilibrium::{solve_equilibrium, EquilibriumData};
use crate::error::{Error, Result};
use crate::specfun::quadrature::QuadratureRule;
use crate::symbols::{log_sigma_n, logistic, ModelConfig, SParam};

/// A model with its equilibrium data and discretized measure.
#[derive(Debug, Clone)]
pub struct FiniteEnsemble {
    pub cfg: ModelConfig,
    pub eq: EquilibriumData,
    pub disc: Discretization,
}

impl FiniteEnsemble {
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        Self::with_options(cfg, &DiscretizationOptions::default())
    }

    pub fn with_options(cfg: &ModelConfig, opts: &DiscretizationOptions) -> Result<Self> {
        cfg.validate()?;
        let eq = solve_equilibrium(&cfg.v_coeffs)?;
        Self::with_equilibrium(cfg, eq, opts)
    }

    pub fn with_equilibrium(cfg: &ModelConfig, eq: EquilibriumData, opts: &DiscretizationOptions) -> Result<Self> {
        cfg.validate()?;
        let disc = Discretization::new(cfg, &eq, opts)?;
        Ok(FiniteEnsemble {
            cfg: cfg.clone(),
            eq,
            disc,
        })
    }

    /// Recurrence table at thinning level `s`.
    pub fn table(&self, s: SParam) -> Result<RecurrenceTable> {
        build_recurrence(&self.cfg, s, &self.disc)
    }

    fn s_finite(&self) -> Option<f64> {
        self.cfg.s.finite()
    }

    /// `1 - sigma_n(x|s)` without cancellation.
    fn complement(&self, x: f64, s: f64) -> f64 {
        logistic(-(s + self.cfg.scaled_q(x)))
    }
}

/// `log L_n = sum_j log(gamma_j(inf)^2 / gamma_j(s)^2)`.
pub fn multiplicative_statistic_gamma_route(ens: &FiniteEnsemble) -> Result<f64> {
    if ens.s_finite().is_none() {
        return Ok(0.0);
    }
    let ts = ens.table(ens.cfg.s)?;
    let ti = ens.table(SParam::PlusInfinity)?;
    Ok(log_ratio_from_tables(&ts, &ti))
}

/// `log L_n` from two tables on the same discretization.
pub fn log_ratio_from_tables(ts: &RecurrenceTable, ti: &RecurrenceTable) -> f64 {
    let n = ts.n();
    let mut acc = n as f64 * (ts.log_mu0 - ti.log_mu0);
    for i in 1..n {
        acc += 2.0 * (n - i) as f64 * (ts.b[i] / ti.b[i]).ln();
    }
    acc
}

/// `log det(I - M)`, `M_jk = int p_j p_k (1 - sigma_n) omega_inf`.
pub fn multiplicative_statistic_det_route(ens: &FiniteEnsemble) -> Result<f64> {
    let s = match ens.s_finite() {
        None => return Ok(0.0),
        Some(s) => s,
    };
    let ti = ens.table(SParam::PlusInfinity)?;
    log_det_route_with_table(ens, &ti, s)
}

fn log_det_route_with_table(ens: &FiniteEnsemble, ti: &RecurrenceTable, s: f64) -> Result<f64> {
    let n = ens.cfg.n;
    let mut g = DMatrix::<f64>::zeros(n, n);
    for (&x, &lw) in ens.disc.nodes.iter().zip(&ens.disc.log_weights) {
        let c = ens.complement(x, s);
        if c < 1e-300 {
            continue;
        }
        let u = ti.eval_all(x, n, 0.5 * lw);
        let sc = c.sqrt();
        let u: Vec<f64> = u.iter().map(|v| v * sc).collect();
        for j in 0..n {
            if u[j] == 0.0 {
                continue;
            }
            for k in 0..=j {
                g[(j, k)] += u[j] * u[k];
            }
        }
    }
    let mut a = DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        for k in 0..=j {
            a[(j, k)] -= g[(j, k)];
            a[(k, j)] = a[(j, k)];
        }
    }
    match a.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            Ok(2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>())
        }
        None => {
            let lu = a.lu();
            let d = lu.determinant();
            if d > 0.0 {
                Ok(d.ln())
            } else {
                Err(Error::PrecisionExhausted(format!("det(I - M) = {d} is not positive")))
            }
        }
    }
}

/// Outer-integration layout for the deformation route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationOptions {
    /// Panel breakpoints as offsets from `s`; the last one is the truncation.
    pub offsets: Vec<f64>,
    pub nodes_per_panel: usize,
    /// Upper limit on recurrence tables built.
    pub max_builds: usize,
}

impl Default for DeformationOptions {
    fn default() -> Self {
        DeformationOptions::single_panel(24)
    }
}

impl DeformationOptions {
    /// Geometric panels on `[s, s + 40]`, 10 nodes each; tighter near `s`.
    pub fn composite() -> Self {
        DeformationOptions {
            offsets: vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 28.0, 40.0],
            nodes_per_panel: 10,
            max_builds: 400,
        }
    }

    /// Single Gauss-Legendre panel with `nodes` nodes on `[s, s + 40]`.
    pub fn single_panel(nodes: usize) -> Self {
        DeformationOptions {
            offsets: vec![0.0, 40.0],
            nodes_per_panel: nodes,
            max_builds: nodes.max(1),
        }
    }

    pub fn rule(&self, s: f64) -> QuadratureRule {
        let breaks: Vec<f64> = self.offsets.iter().map(|o| s + o).collect();
        QuadratureRule::panels(&breaks, self.nodes_per_panel)
    }
}

/// Result of the deformation route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationResult {
    pub log_l: f64,
    /// `n e^{-(s + truncation)}`, a bound on the discarded tail.
    pub tail_bound: f64,
    pub tables_built: usize,
}

/// `u -> int K_n(x,x|u) d/du omega_n(x|u) dx`.
pub fn deformation_integrand(ens: &FiniteEnsemble, u: f64) -> Result<f64> {
    let tab = ens.table(SParam::Finite(u))?;
    let mut acc = 0.0;
    for (&x, &lw) in ens.disc.nodes.iter().zip(&ens.disc.log_weights) {
        let c = ens.complement(x, u);
        if c < 1e-40 {
            continue;
        }
        let half = 0.5 * (lw + log_sigma_n(&ens.cfg, x, SParam::Finite(u)));
        let p = tab.eval_pair(x, ens.cfg.n, half);
        let k = tab.b[ens.cfg.n] * (p.d_cur * p.prev - p.d_prev * p.cur) * (2.0 * p.log_scale).exp();
        acc += c * k;
    }
    Ok(acc)
}

/// `log L = -int_s^inf int K_n(x,x|u) d/du omega_n(x|u) dx du`.
pub fn multiplicative_statistic_deformation_route(
    ens: &FiniteEnsemble,
    opts: &DeformationOptions,
) -> Result<DeformationResult> {
    let s = match ens.s_finite() {
        None => {
            return Ok(DeformationResult {
                log_l: 0.0,
                tail_bound: 0.0,
                tables_built: 0,
            })
        }
        Some(s) => s,
    };
    let rule = opts.rule(s);
    let top = s + opts.offsets.last().copied().unwrap_or(40.0);
    let tail_bound = ens.cfg.n as f64 * (-top).exp();
    let mut acc = 0.0;
    for (k, (&u, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        if k >= opts.max_builds {
            return Err(Error::BudgetExceeded {
                partial: -acc,
                estimate: tail_bound + ens.cfg.n as f64 * (-u).exp(),
                reason: format!("deformation route stopped after {k} tables"),
            });
        }
        acc += w * deformation_integrand(ens, u)?;
    }
    Ok(DeformationResult {
        log_l: -acc,
        tail_bound,
        tables_built: rule.len(),
    })
}
