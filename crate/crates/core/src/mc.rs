//! Monte Carlo for the Laguerre ensemble `x^alpha e^{-n x}` (beta = 2) via the
//! bidiagonal chi model, with importance weights `prod_j sigma_n(x_j | s)`.

use std::io::Write;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::tridiag::tridiag_eigen;
use crate::symbols::{log_sigma_n, ModelConfig};

/// Effective sample size below which conditional estimates are flagged.
pub const MIN_ESS: f64 = 100.0;

/// Independent stream for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn chi(rng: &mut ChaCha8Rng, k: f64) -> Result<f64> {
    let d = ChiSquared::new(k).map_err(|e| Error::Domain(format!("chi-square with {k} degrees: {e}")))?;
    Ok(d.sample(rng).sqrt())
}

/// Eigenvalues of `B B^T / (2n)` with `B` lower bidiagonal, diagonal
/// `chi_{2(n+alpha)}, ..., chi_{2(alpha+1)}` and subdiagonal `chi_{2(n-1)}, ..., chi_2`.
fn draw(n: usize, alpha: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let d: Vec<f64> = (0..n)
        .map(|i| chi(rng, 2.0 * ((n - i) as f64 + alpha)))
        .collect::<Result<_>>()?;
    let e: Vec<f64> = (1..n).map(|i| chi(rng, 2.0 * (n - i) as f64)).collect::<Result<_>>()?;
    let scale = 1.0 / (2.0 * n as f64);
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let sub = if i > 0 { e[i - 1] * e[i - 1] } else { 0.0 };
            (d[i] * d[i] + sub) * scale
        })
        .collect();
    let off: Vec<f64> = (1..n).map(|i| e[i - 1] * d[i - 1] * scale).collect();
    let mut v = tridiag_eigen(&diag, &off, false)?.values;
    for x in &mut v {
        // round-off can leave the smallest eigenvalue a hair below zero
        *x = x.max(0.0);
    }
    Ok(v)
}

/// One sample of the ensemble, deterministic in `(seed, index)`. On an
/// eigensolver failure the draw is repeated on a shifted stream.
pub fn sample_laguerre(n: usize, alpha: f64, seed: u64, index: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("ensemble size must be at least 1");
    }
    if !(alpha > -1.0) {
        return domain(format!("alpha must exceed -1, got {alpha}"));
    }
    let mut stream = index;
    for attempt in 0..8u64 {
        let mut rng = sample_rng(seed, stream);
        match draw(n, alpha, &mut rng) {
            Ok(v) => return Ok(v),
            Err(e) => {
                warn!("sample {index}: eigensolver failed ({e}); redrawing, attempt {}", attempt + 1);
                stream = stream.wrapping_add(1 << 40);
            }
        }
    }
    Err(Error::NoConvergence(format!("sample {index} failed on every stream")))
}

/// Samples with their importance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    pub n: usize,
    pub alpha: f64,
    pub eigenvalues: Vec<Vec<f64>>,
    pub log_weights: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SampleBatch {
    /// Draws `count` samples for `cfg` (which must have `V(x) = x`), in parallel.
    pub fn generate(cfg: &ModelConfig, count: usize, seed: u64) -> Result<Self> {
        if cfg.v_coeffs.len() != 2 || cfg.v_coeffs[0] != 0.0 || cfg.v_coeffs[1] != 1.0 {
            return domain("the sampler covers V(x) = x only");
        }
        let eigenvalues: Vec<Vec<f64>> = (0..count as u64)
            .into_par_iter()
            .map(|i| sample_laguerre(cfg.n, cfg.alpha, seed, i))
            .collect::<Result<_>>()?;
        let log_weights: Vec<f64> = eigenvalues
            .iter()
            .map(|xs| xs.iter().map(|&x| log_sigma_n(cfg, x, cfg.s)).sum())
            .collect();
        let weights = log_weights.iter().map(|l: &f64| l.exp()).collect();
        Ok(SampleBatch {
            seed,
            n: cfg.n,
            alpha: cfg.alpha,
            eigenvalues,
            log_weights,
            weights,
        })
    }

    /// The same draws, weighted for the symbol of `cfg`.
    pub fn reweighted(&self, cfg: &ModelConfig) -> Result<Self> {
        if cfg.n != self.n || cfg.alpha != self.alpha {
            return domain("reweighting needs the same n and alpha");
        }
        let log_weights: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|xs| xs.iter().map(|&x| log_sigma_n(cfg, x, cfg.s)).sum())
            .collect();
        let weights = log_weights.iter().map(|l: &f64| l.exp()).collect();
        Ok(SampleBatch {
            log_weights,
            weights,
            ..self.clone()
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `(sum w)^2 / sum w^2`.
    pub fn effective_sample_size(&self) -> f64 {
        let s: f64 = self.weights.iter().sum();
        let s2: f64 = self.weights.iter().map(|w| w * w).sum();
        if s2 == 0.0 {
            0.0
        } else {
            s * s / s2
        }
    }

    /// Eigenvalue rows as little-endian `f64`.
    pub fn write_raw<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in &self.eigenvalues {
            for x in row {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

fn mean_stderr(v: &[f64]) -> Estimate {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

/// Unbiased estimate of `L_n(s) = E[prod_j sigma_n(x_j | s)]`.
pub fn estimate_l(batch: &SampleBatch) -> Estimate {
    mean_stderr(&batch.weights)
}

/// Self-normalised estimate of the conditioned one-point statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate {
    pub value: f64,
    /// Delete-one jackknife.
    pub stderr: f64,
    pub ess: f64,
    pub warning: Option<String>,
}

/// `E[w sum_j f(x_j)] / E[w]`.
pub fn conditional_observable<F: Fn(f64) -> f64>(batch: &SampleBatch, f: F) -> Result<ConditionalEstimate> {
    if batch.len() < 2 {
        return domain("need at least two samples");
    }
    let w = &batch.weights;
    let a: Vec<f64> = batch
        .eigenvalues
        .iter()
        .zip(w)
        .map(|(xs, w)| w * xs.iter().map(|&x| f(x)).sum::<f64>())
        .collect();
    let sa: f64 = a.iter().sum();
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return Err(Error::NoConvergence("all importance weights underflow".into()));
    }
    let value = sa / sw;
    let n = batch.len() as f64;
    let loo: Vec<f64> = a.iter().zip(w).map(|(ai, wi)| (sa - ai) / (sw - wi)).collect();
    let mean_loo = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|t| (t - mean_loo) * (t - mean_loo)).sum::<f64>();
    let ess = batch.effective_sample_size();
    let warning = if ess < MIN_ESS {
        let msg = format!("effective sample size {ess:.1} below {MIN_ESS}");
        warn!("{msg}");
        Some(msg)
    } else {
        None
    };
    Ok(ConditionalEstimate {
        value,
        stderr: var.sqrt(),
        ess,
        warning,
    })
}

/// Mean and standard error of `count` chi-square draws with `k` degrees of freedom.
pub fn chi_square_check(k: f64, count: usize, seed: u64) -> Result<Estimate> {
    let mut rng = sample_rng(seed, 0);
    let v: Vec<f64> = (0..count).map(|_| chi(&mut rng, k).map(|c| c * c)).collect::<Result<_>>()?;
    Ok(mean_stderr(&v))
}

/// Record written next to a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
    #[serde(rename = "ESS")]
    pub ess: f64,
}

impl BatchSummary {
    pub fn new(batch: &SampleBatch) -> Self {
        let e = estimate_l(batch);
        BatchSummary {
            seed: batch.seed,
            n: batch.n,
            count: batch.len(),
            mean: e.mean,
            stderr: e.stderr,
            ess: batch.effective_sample_size(),
        }
    }
}
