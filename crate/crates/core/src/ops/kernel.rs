//! Christoffel-Darboux and correlation kernels.

use serde::{Deserialize, Serialize};

use super::recurrence::RecurrenceTable;
use crate::equilibrium::EquilibriumData;
use crate::error::{Error, Result};

/// Which kernel a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    ChristoffelDarboux,
    Correlation,
    FiniteNScaled,
    Bessel,
    ConditionalThinned,
}

/// Kernel samples on a grid, `values[i][j] = K(grid[i], grid[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub kind: KernelKind,
}

impl KernelTable {
    pub fn tabulate<F: Fn(f64, f64) -> Result<f64>>(grid: &[f64], kind: KernelKind, f: F) -> Result<Self> {
        let n = grid.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = f(grid[i], grid[j])?;
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        Ok(KernelTable {
            grid: grid.to_vec(),
            values,
            kind,
        })
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.grid.len();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max((self.values[i][j] - self.values[j][i]).abs());
            }
        }
        m
    }
}

fn check(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::PrecisionExhausted("kernel evaluation overflowed".into()))
    }
}

impl RecurrenceTable {
    fn kernel_with_offsets(&self, x: f64, y: f64, ox: f64, oy: f64) -> Result<f64> {
        let n = self.n();
        let near = (x - y).abs() <= 1e-9 * (x.abs() + y.abs()).max(1e-300);
        if x == y || near {
            let px = self.eval_pair(x, n, ox);
            let py = self.eval_pair(y, n, oy);
            if x == y {
                // confluent form
                let v = self.b[n] * (px.d_cur * py.prev - px.d_prev * py.cur);
                return check(v * (px.log_scale + py.log_scale).exp());
            }
            return self.kernel_direct_sum_offsets(x, y, ox, oy);
        }
        let px = self.eval_pair(x, n, ox);
        let py = self.eval_pair(y, n, oy);
        let v = self.b[n] * (px.cur * py.prev - px.prev * py.cur) / (x - y);
        check(v * (px.log_scale + py.log_scale).exp())
    }

    fn kernel_direct_sum_offsets(&self, x: f64, y: f64, ox: f64, oy: f64) -> Result<f64> {
        let n = self.n();
        let vx = self.eval_all(x, n, ox);
        let vy = self.eval_all(y, n, oy);
        check(vx.iter().zip(&vy).map(|(a, b)| a * b).sum())
    }

    /// `K_n(x, y) = sum_{j<n} p_j(x) p_j(y)`, Christoffel-Darboux off the diagonal
    /// and its confluent form on it.
    pub fn cd_kernel(&self, x: f64, y: f64) -> Result<f64> {
        if x < 0.0 || y < 0.0 {
            return Err(Error::Domain("kernel arguments must be nonnegative".into()));
        }
        self.kernel_with_offsets(x, y, 0.0, 0.0)
    }

    /// Correlation kernel `sqrt(omega(x)) K_n(x, y) sqrt(omega(y))`.
    pub fn correlation_kernel(&self, x: f64, y: f64) -> Result<f64> {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::Domain("correlation kernel needs x, y > 0".into()));
        }
        self.kernel_with_offsets(x, y, 0.5 * self.log_weight(x), 0.5 * self.log_weight(y))
    }

    /// Diagonal `K_n(x, x)` by direct summation (reference for the confluent form).
    pub fn cd_kernel_direct(&self, x: f64, y: f64) -> Result<f64> {
        self.kernel_direct_sum_offsets(x, y, 0.0, 0.0)
    }

    /// `omega(x) K_n(x, x)`.
    pub fn correlation_diagonal(&self, x: f64) -> Result<f64> {
        self.correlation_kernel(x, x)
    }

    /// `(1/(n^2 c_V)) Khat_n(u/(c_V n^2), v/(c_V n^2))`.
    pub fn scaled_hard_edge_kernel(&self, eq: &EquilibriumData, u: f64, v: f64) -> Result<f64> {
        let n = self.n() as f64;
        let c = eq.c_v * n * n;
        Ok(self.correlation_kernel(u / c, v / c)? / c)
    }
}
