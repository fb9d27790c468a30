//! Thinning symbols of the ensemble and of the limiting hard-edge process.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::specfun::polylog::log1p_exp_neg;

/// The thinning parameter `s`, with `+inf` (no thinning) as an explicit case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SParam {
    Finite(f64),
    PlusInfinity,
}

impl SParam {
    pub fn is_infinite(self) -> bool {
        matches!(self, SParam::PlusInfinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            SParam::Finite(s) => Some(s),
            SParam::PlusInfinity => None,
        }
    }
}

impl From<f64> for SParam {
    fn from(s: f64) -> Self {
        if s == f64::INFINITY {
            SParam::PlusInfinity
        } else {
            SParam::Finite(s)
        }
    }
}

impl Serialize for SParam {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SParam::Finite(s) => ser.serialize_f64(*s),
            SParam::PlusInfinity => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SParam {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(s) => Ok(SParam::from(s)),
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(SParam::PlusInfinity),
                other => Err(serde::de::Error::custom(format!(
                    "s must be a number or \"inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// Evaluates a polynomial given by ascending coefficients.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Ascending coefficients of the derivative.
pub fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

/// Model of the thinned ensemble: weight `x^alpha e^{-n V(x)} sigma_n(x|s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub alpha: f64,
    #[serde(rename = "V_coeffs")]
    pub v_coeffs: Vec<f64>,
    #[serde(rename = "Q_coeffs")]
    pub q_coeffs: Vec<f64>,
    pub m: u32,
    pub t: f64,
    pub s: SParam,
    pub n: usize,
}

impl ModelConfig {
    /// Laguerre model `V(x) = x`, `Q(x) = t x^m`.
    pub fn laguerre(alpha: f64, m: u32, t: f64, s: SParam, n: usize) -> Self {
        let mut q = vec![0.0; m as usize + 1];
        q[m as usize] = t;
        ModelConfig {
            alpha,
            v_coeffs: vec![0.0, 1.0],
            q_coeffs: q,
            m,
            t,
            s,
            n,
        }
    }

    pub fn with_s(&self, s: SParam) -> Self {
        ModelConfig { s, ..self.clone() }
    }

    pub fn with_n(&self, n: usize) -> Self {
        ModelConfig { n, ..self.clone() }
    }

    pub fn v(&self, x: f64) -> f64 {
        poly_eval(&self.v_coeffs, x)
    }

    pub fn q(&self, x: f64) -> f64 {
        poly_eval(&self.q_coeffs, x)
    }

    /// `n^{2m} Q(x)`.
    pub fn scaled_q(&self, x: f64) -> f64 {
        (self.n as f64).powi(2 * self.m as i32) * self.q(x)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > -1.0) {
            return bad(format!("alpha must exceed -1, got {}", self.alpha));
        }
        match self.v_coeffs.iter().rposition(|&c| c != 0.0) {
            Some(d) if d >= 1 && self.v_coeffs[d] > 0.0 => {}
            _ => return bad("V must be a nonconstant polynomial with positive leading coefficient".into()),
        }
        if self.m == 0 {
            return bad("m must be a positive integer".into());
        }
        if !(self.t > 0.0) {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        let m = self.m as usize;
        if self.q_coeffs.len() <= m {
            return bad("Q has no x^m term".into());
        }
        if self.q_coeffs[..m].iter().any(|&c| c != 0.0) {
            return bad("Q must vanish to order m at 0".into());
        }
        if (self.q_coeffs[m] - self.t).abs() > 1e-12 * self.t {
            return bad(format!(
                "leading coefficient of Q ({}) must equal t ({})",
                self.q_coeffs[m], self.t
            ));
        }
        for k in 0..=90 {
            let x = 1e-6 * 10f64.powf(k as f64 / 10.0);
            if !(self.q(x) > 0.0) {
                return bad(format!("Q is not positive at x = {x:e}"));
            }
        }
        if let SParam::Finite(s) = self.s {
            if !s.is_finite() {
                return bad("s must be finite or +inf".into());
            }
        }
        Ok(())
    }
}

/// `log sigma_n(x|s)`, exact 0 when `s = +inf`.
pub fn log_sigma_n(cfg: &ModelConfig, x: f64, s: SParam) -> f64 {
    match s {
        SParam::PlusInfinity => 0.0,
        SParam::Finite(s) => -log1p_exp_neg(s + cfg.scaled_q(x)),
    }
}

/// `sigma_n(x|s) = 1 / (1 + e^{-s - n^{2m} Q(x)})` at the configured `s`.
pub fn sigma_n(cfg: &ModelConfig, x: f64) -> f64 {
    sigma_n_at(cfg, x, cfg.s)
}

/// `sigma_n` at an explicit `s`.
pub fn sigma_n_at(cfg: &ModelConfig, x: f64, s: SParam) -> f64 {
    match s {
        SParam::PlusInfinity => 1.0,
        SParam::Finite(s) => logistic(s + cfg.scaled_q(x)),
    }
}

/// `1 / (1 + e^{-z})`.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Exponent `s + (-1)^m zeta^m` of the limiting symbol.
fn phi_exponent(zeta: f64, s: f64, m: u32) -> f64 {
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    s + sign * zeta.powi(m as i32)
}

/// `sigma_Phi(zeta|s) = 1 / (1 + e^{-s - (-1)^m zeta^m})`.
pub fn sigma_phi(zeta: f64, s: f64, m: u32) -> f64 {
    logistic(phi_exponent(zeta, s, m))
}

/// `d/ds sigma_Phi = sigma_Phi (1 - sigma_Phi)`.
pub fn d_ds_sigma_phi(zeta: f64, s: f64, m: u32) -> f64 {
    let z = phi_exponent(zeta, s, m);
    logistic(z) * logistic(-z)
}

/// `d/ds log sigma_Phi = 1 - sigma_Phi`.
pub fn d_ds_log_sigma_phi(zeta: f64, s: f64, m: u32) -> f64 {
    logistic(-phi_exponent(zeta, s, m))
}

/// Scaling constants linking the finite-n ensemble to the limiting symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinningScale {
    pub x_param: f64,
    pub u_param: f64,
    #[serde(rename = "c_V")]
    pub c_v: f64,
    pub m: u32,
}

impl ThinningScale {
    /// `x = (4 c_V / t^{1/m})^{1/2}`, `u = t / c_V^m`.
    pub fn new(c_v: f64, t: f64, m: u32) -> Self {
        let mf = m as f64;
        ThinningScale {
            x_param: (4.0 * c_v / t.powf(1.0 / mf)).sqrt(),
            u_param: t / c_v.powi(m as i32),
            c_v,
            m,
        }
    }

    /// Scale for the limiting objects alone, parametrised by `x` (with `c_V = 1`).
    pub fn from_x(x_param: f64, m: u32) -> Self {
        ThinningScale {
            x_param,
            u_param: (2.0 / x_param).powi(2 * m as i32),
            c_v: 1.0,
            m,
        }
    }

    /// `sigma_Phi(-4u/x^2 | s) = 1 / (1 + e^{-s - u_param u^m})`, the symbol in
    /// the Bessel variable `u >= 0`.
    pub fn symbol(&self, u: f64, s: SParam) -> f64 {
        match s {
            SParam::PlusInfinity => 1.0,
            SParam::Finite(s) => logistic(s + self.u_param * u.powi(self.m as i32)),
        }
    }

    /// `1 - symbol`.
    pub fn symbol_complement(&self, u: f64, s: SParam) -> f64 {
        match s {
            SParam::PlusInfinity => 0.0,
            SParam::Finite(s) => logistic(-(s + self.u_param * u.powi(self.m as i32))),
        }
    }

    /// `d/ds symbol`.
    pub fn symbol_ds(&self, u: f64, s: f64) -> f64 {
        let z = s + self.u_param * u.powi(self.m as i32);
        logistic(z) * logistic(-z)
    }
}
