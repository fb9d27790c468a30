//! Recurrence coefficients by the discretized Stieltjes procedure.

use serde::{Deserialize, Serialize};

use super::discretize::{log_sum_exp, Discretization};
use crate::error::{Error, Result};
use crate::symbols::{log_sigma_n, ModelConfig, SParam};

/// Largest supported `n`.
pub const N_MAX: usize = 400;

const BIG: f64 = 1e100;
const LN_BIG: f64 = 230.258_509_299_404_56;

/// Three-term recurrence `x p_j = b_{j+1} p_{j+1} + a_j p_j + b_j p_{j-1}` of the
/// orthonormal polynomials for one weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceTable {
    /// `a_0 .. a_{n}`.
    pub a: Vec<f64>,
    /// `b_0 = 0, b_1 .. b_{n+1}`.
    pub b: Vec<f64>,
    /// `log int omega`.
    pub log_mu0: f64,
    pub config: ModelConfig,
    pub s: SParam,
}

impl RecurrenceTable {
    pub fn n(&self) -> usize {
        self.config.n
    }

    /// `log gamma_j^2 = -log int P_j^2 omega`.
    pub fn log_gamma_sq(&self, j: usize) -> f64 {
        -(self.log_mu0 + 2.0 * self.b[1..=j].iter().map(|b| b.ln()).sum::<f64>())
    }

    /// `gamma_j`; may overflow to `inf` for large `j`, use [`Self::log_gamma_sq`] then.
    pub fn gamma(&self, j: usize) -> f64 {
        (0.5 * self.log_gamma_sq(j)).exp()
    }

    /// Log of the weight `x^alpha e^{-nV(x)} sigma_n(x|s)` (without quadrature weight).
    pub fn log_weight(&self, x: f64) -> f64 {
        let c = &self.config;
        c.alpha * x.ln() - c.n as f64 * c.v(x) + log_sigma_n(c, x, self.s)
    }
}

/// Builds the table for `cfg` at thinning `s` on the given discretization.
///
/// Computes `n + 1` steps so that `b_n` (needed by Christoffel-Darboux) is available.
pub fn build_recurrence(cfg: &ModelConfig, s: SParam, disc: &Discretization) -> Result<RecurrenceTable> {
    if cfg.n > N_MAX {
        return Err(Error::Config(format!("n = {} exceeds N_max = {N_MAX}", cfg.n)));
    }
    let log_w = disc.deformed_log_weights(cfg, s);
    let (a, b, log_mu0) = stieltjes(&disc.nodes, &log_w, cfg.n + 1)?;
    Ok(RecurrenceTable {
        a,
        b,
        log_mu0,
        config: cfg.clone(),
        s,
    })
}

/// Lanczos / Stieltjes on the discrete measure `sum_i e^{log_w_i} delta_{x_i}`.
///
/// The weighted vectors `sqrt(w_i) p_j(x_i)` are unit vectors; each node keeps
/// its own log-scale so that entries far below the underflow threshold still
/// grow into range. Returns `(a_0..a_{steps-1}, [0, b_1..b_steps], log mu0)`.
pub fn stieltjes(x: &[f64], log_w: &[f64], steps: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let m = x.len();
    if steps > m {
        return Err(Error::PrecisionExhausted(format!(
            "quadrature order {m} below the {steps} steps requested; increase quadrature order"
        )));
    }
    let log_mu0 = log_sum_exp(log_w);
    let mut scale: Vec<f64> = log_w.iter().map(|lw| 0.5 * (lw - log_mu0)).collect();
    let mut e2s: Vec<f64> = scale.iter().map(|s| (2.0 * s).exp()).collect();
    let mut cur = vec![1.0; m];
    let mut prev = vec![0.0; m];
    let mut a = Vec::with_capacity(steps);
    let mut b = vec![0.0];
    for j in 0..steps {
        let mut aj = 0.0;
        for i in 0..m {
            aj += x[i] * cur[i] * cur[i] * e2s[i];
        }
        let bj = b[j];
        let mut norm2 = 0.0;
        for i in 0..m {
            let r = (x[i] - aj) * cur[i] - bj * prev[i];
            prev[i] = r;
            norm2 += r * r * e2s[i];
        }
        let bn = norm2.sqrt();
        if !(bn > 0.0) || !bn.is_finite() {
            return Err(Error::PrecisionExhausted(format!(
                "loss of positivity in b_{}; increase quadrature order or enable extended precision",
                j + 1
            )));
        }
        for i in 0..m {
            let next = prev[i] / bn;
            prev[i] = cur[i];
            cur[i] = next;
            if next.abs() > BIG {
                cur[i] /= BIG;
                prev[i] /= BIG;
                scale[i] += LN_BIG;
                e2s[i] = (2.0 * scale[i]).exp();
            }
        }
        a.push(aj);
        b.push(bn);
    }
    Ok((a, b, log_mu0))
}

/// Values of `p_j(x)` in a shared log-scale: `p_j(x) = mant_j exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPair {
    pub prev: f64,
    pub cur: f64,
    pub d_prev: f64,
    pub d_cur: f64,
    pub log_scale: f64,
}

impl RecurrenceTable {
    /// Runs the recurrence to `(p_{k-1}, p_k)` and derivatives at `x`, with an
    /// extra `offset` added to the log-scale (e.g. half the log-weight).
    pub fn eval_pair(&self, x: f64, k: usize, offset: f64) -> ScaledPair {
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut d_prev = 0.0;
        let mut d_cur = 0.0;
        let mut log_scale = -0.5 * self.log_mu0 + offset;
        for j in 0..k {
            let next = ((x - self.a[j]) * cur - self.b[j] * prev) / self.b[j + 1];
            let d_next = ((x - self.a[j]) * d_cur + cur - self.b[j] * d_prev) / self.b[j + 1];
            prev = cur;
            cur = next;
            d_prev = d_cur;
            d_cur = d_next;
            let mag = cur.abs().max(prev.abs());
            if mag > BIG || (mag < 1.0 / BIG && mag > 0.0) {
                let sh = mag.ln();
                let f = (-sh).exp();
                prev *= f;
                cur *= f;
                d_prev *= f;
                d_cur *= f;
                log_scale += sh;
            }
        }
        ScaledPair {
            prev,
            cur,
            d_prev,
            d_cur,
            log_scale,
        }
    }

    /// `p_0(x) .. p_{k-1}(x)` times `exp(offset)`, as plain floats (may underflow to 0).
    pub fn eval_all(&self, x: f64, k: usize, offset: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(k);
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut log_scale = -0.5 * self.log_mu0 + offset;
        for j in 0..k {
            out.push(cur * log_scale.exp());
            let next = ((x - self.a[j]) * cur - self.b[j] * prev) / self.b[j + 1];
            prev = cur;
            cur = next;
            let mag = cur.abs().max(prev.abs());
            if mag > BIG || (mag < 1.0 / BIG && mag > 0.0) {
                let sh = mag.ln();
                let f = (-sh).exp();
                prev *= f;
                cur *= f;
                log_scale += sh;
            }
        }
        out
    }
}
