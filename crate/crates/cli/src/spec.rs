//! Experiment configuration: one JSON document per run.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hardedge::{ModelConfig, SParam};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Kernel,
    Statistic,
    Verify,
    Mc,
    Equilibrium,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Statistic => "statistic",
            Command::Verify => "verify",
            Command::Mc => "mc",
            Command::Equilibrium => "equilibrium",
        }
    }
}

fn default_model() -> ModelConfig {
    ModelConfig::laguerre(0.0, 1, 4.0, SParam::Finite(0.0), 200)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Empty means `[model.n]`.
    pub n: Vec<usize>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            s: vec![0.0, 2.0],
            x: vec![0.05, 0.1, 0.2],
            u: vec![0.5, 1.0, 2.0],
            n: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Orders {
    /// Nyström order for the limiting operator.
    pub nystrom: usize,
    /// Gauss-Legendre nodes of the deformation route.
    pub deformation: usize,
    /// Chebyshev-Lobatto nodes of the potential profile.
    pub profile: usize,
}

impl Default for Orders {
    fn default() -> Self {
        Orders {
            nystrom: hardedge::bessel_limit::DEFAULT_ORDER,
            deformation: 24,
            profile: 33,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McOptions {
    pub samples: usize,
    /// Also run the sampler inside `statistic`.
    pub in_statistic: bool,
    /// Write `eigenvalues.f64` next to the summary.
    pub raw_dump: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            samples: 10_000,
            in_statistic: false,
            raw_dump: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub kernel_rel: f64,
    pub route: f64,
    pub mc_sigmas: f64,
    pub f_beta: f64,
    pub jump: f64,
    pub value_at_zero: f64,
    pub expansion: f64,
    pub equilibrium: f64,
    pub euler_lagrange: f64,
    pub small_x_rel: f64,
    pub small_x_exponent: f64,
    pub rate_exponent: f64,
    pub bessel_ode: f64,
    pub schroedinger_s0: f64,
    pub schroedinger_s30: f64,
    pub profile: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kernel_rel: 0.02,
            route: 1e-6,
            mc_sigmas: 3.0,
            f_beta: 1e-10,
            jump: 1e-9,
            value_at_zero: 1e-10,
            expansion: 1e-4,
            equilibrium: 1e-8,
            euler_lagrange: 1e-7,
            small_x_rel: 0.02,
            small_x_exponent: 0.4,
            rate_exponent: 0.5,
            bessel_ode: 1e-8,
            schroedinger_s0: 5e-2,
            schroedinger_s30: 1e-3,
            profile: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Optional; when present it must match the subcommand.
    pub command: Option<Command>,
    pub model: ModelConfig,
    pub grids: Grids,
    pub orders: Orders,
    pub seed: u64,
    pub mc: McOptions,
    /// Used when `--out` is not given.
    pub out: Option<PathBuf>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            command: None,
            model: default_model(),
            grids: Grids::default(),
            orders: Orders::default(),
            seed: 1,
            mc: McOptions::default(),
            out: None,
            tolerances: Tolerances::default(),
        }
    }
}

fn check_grid<T: PartialOrd + Copy>(name: &str, g: &[T], finite: impl Fn(T) -> bool) -> Result<()> {
    if g.is_empty() {
        bail!("grid {name} is empty");
    }
    if !g.iter().all(|&v| finite(v)) {
        bail!("grid {name} has a non-finite entry");
    }
    if g.windows(2).any(|w| !(w[0] < w[1])) {
        bail!("grid {name} is not strictly increasing");
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed experiment JSON")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// `grids.n`, or `[model.n]` when it is empty.
    pub fn n_list(&self) -> Vec<usize> {
        if self.grids.n.is_empty() {
            vec![self.model.n]
        } else {
            self.grids.n.clone()
        }
    }

    pub fn validate(&self, cmd: Command) -> Result<()> {
        if let Some(c) = self.command {
            if c != cmd {
                bail!("config is for command {:?}, invoked as {:?}", c.name(), cmd.name());
            }
        }
        self.model.validate()?;
        check_grid("s", &self.grids.s, f64::is_finite)?;
        check_grid("x", &self.grids.x, |x: f64| x.is_finite() && x > 0.0)?;
        check_grid("u", &self.grids.u, |u: f64| u.is_finite() && u > 0.0)?;
        check_grid("n", &self.n_list(), |n: usize| n >= 1)?;
        if self.orders.nystrom < 4 || self.orders.deformation < 2 {
            bail!("quadrature orders too small");
        }
        if cmd == Command::Mc && self.mc.samples < 2 {
            bail!("mc.samples must be at least 2");
        }
        Ok(())
    }

    /// Creates `dir` and checks that it accepts files.
    pub fn prepare_out(dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let probe = dir.join(".hardedge-write-probe");
        fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
        fs::remove_file(&probe)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_run() {
        let s = ExperimentSpec::from_json("{}").unwrap();
        assert_eq!(s, ExperimentSpec::default());
        s.validate(Command::Kernel).unwrap();
        assert_eq!(s.n_list(), vec![200]);
    }

    #[test]
    fn round_trip() {
        let mut s = ExperimentSpec::default();
        s.grids.s = vec![-1.0, 0.0, 4.0];
        s.model.s = SParam::PlusInfinity;
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"V_coeffs\""));
        assert_eq!(ExperimentSpec::from_json(&text).unwrap(), s);
    }

    #[test]
    fn invalid_grids() {
        let s = ExperimentSpec::from_json(r#"{"grids": {"s": []}}"#).unwrap();
        assert!(s.validate(Command::Statistic).is_err());
        let s = ExperimentSpec::from_json(r#"{"grids": {"u": [1.0, 0.5]}}"#).unwrap();
        assert!(s.validate(Command::Kernel).is_err());
        let s = ExperimentSpec::from_json(r#"{"grids": {"n": [100, 100]}}"#).unwrap();
        assert!(s.validate(Command::Statistic).is_err());
        let s = ExperimentSpec::from_json(r#"{"command": "mc"}"#).unwrap();
        assert!(s.validate(Command::Kernel).is_err());
        assert!(ExperimentSpec::from_json(r#"{"grid": {}}"#).is_err());
        assert!(ExperimentSpec::from_json("{").is_err());
    }
}
