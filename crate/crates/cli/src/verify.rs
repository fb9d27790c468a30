//! The `verify` suite: special functions, parametrix, equilibrium, limit routes,
//! nonlocal structure and the global-parametrix scalar.

use std::path::Path;

use anyhow::Result;
use hardedge::bessel_limit::limiting_statistic;
use hardedge::nonlocal::{bessel_ode_residual, extract_p, fit_power_law, schroedinger_residual, small_x_expansion_check};
use hardedge::parametrix::{fit_expansion, jump_residual, max_abs, parametrix, value_at_zero, value_at_zero_numeric, Ray};
use hardedge::specfun::{f_beta_polylog, f_beta_quadrature};
use hardedge::{p0_global_parametrix, solve_equilibrium, ModelConfig, SParam, ThinningScale};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{equilibrium_checks, PROFILE_COLUMNS};
use crate::output::{write_csv, write_json, Check, Outcome};
use crate::spec::{ExperimentSpec, Tolerances};

pub const PARAMETRIX_ALPHAS: [f64; 3] = [0.0, 0.3, 1.0];
pub const P0_SIZES: [usize; 3] = [20, 40, 80];

#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

fn check_or_error(name: String, r: hardedge::Result<f64>, tol: f64) -> Check {
    match r {
        Ok(v) => Check::at_most(name, v, tol),
        Err(e) => Check::errored(name, e),
    }
}

pub fn f_beta_block(tol: &Tolerances) -> Block {
    let mut checks = Vec::new();
    for beta in [-0.5, 0.0, 1.5] {
        for s in [0.5, 1.0, 3.0] {
            let r = f_beta_quadrature(beta, s).and_then(|q| Ok((q - f_beta_polylog(beta, s)?).abs()));
            checks.push(check_or_error(format!("F_beta beta={beta} s={s}"), r, tol.f_beta));
        }
    }
    Block { name: "f_beta", checks }
}

/// Radii `10^{-1} .. 10^{1}` used on every ray.
pub fn ray_radii() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-1.0 + 2.0 * k as f64 / 9.0)).collect()
}

pub fn parametrix_block(tol: &Tolerances) -> Block {
    let mut checks = Vec::new();
    for alpha in PARAMETRIX_ALPHAS {
        for (ray, label) in [(Ray::Negative, "negative"), (Ray::Upper, "upper"), (Ray::Lower, "lower")] {
            let r = ray_radii()
                .into_iter()
                .map(|r| jump_residual(alpha, ray, r))
                .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)));
            checks.push(check_or_error(format!("jump alpha={alpha} ray={label}"), r, tol.jump));
        }
        let det = [Complex64::new(0.7, 0.4), Complex64::new(-2.0, 1.5), Complex64::new(3.0, -0.1)]
            .into_iter()
            .map(|z| parametrix(alpha, z).map(|m| (m.determinant() - 1.0).norm()))
            .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)));
        checks.push(check_or_error(format!("det alpha={alpha}"), det, tol.jump));
        let zero = value_at_zero_numeric(alpha).and_then(|num| Ok(max_abs(&(num - value_at_zero(alpha)?))));
        checks.push(check_or_error(format!("value_at_zero alpha={alpha}"), zero, tol.value_at_zero));
        let target = Complex64::new(0.0, (4.0 * alpha * alpha - 1.0) / 16.0);
        let fit = fit_expansion(alpha, 0, 1).map(|f| (f.inverse_z() - target).norm());
        checks.push(check_or_error(format!("expansion_12 alpha={alpha}"), fit, tol.expansion));
    }
    Block {
        name: "parametrix",
        checks,
    }
}

/// A convex quadratic besides `V = x`.
pub const SECOND_POTENTIAL: [f64; 3] = [0.0, 1.0, 0.3];

pub fn equilibrium_block(tol: &Tolerances) -> Block {
    let mut checks = Vec::new();
    for v in [vec![0.0, 1.0], SECOND_POTENTIAL.to_vec()] {
        match solve_equilibrium(&v) {
            Ok(eq) => checks.extend(equilibrium_checks(&eq, tol.equilibrium, tol.euler_lagrange)),
            Err(e) => checks.push(Check::errored(format!("V={v:?} solve"), e)),
        }
    }
    Block {
        name: "equilibrium",
        checks,
    }
}

/// `(alpha, s, x)` points where the trace and determinant routes are compared.
pub const ROUTE_POINTS: [(f64, f64, f64); 2] = [(0.0, 0.0, 1.0), (0.5, 1.0, 1.0)];

pub fn limit_block(tol: &Tolerances) -> Block {
    let checks = ROUTE_POINTS
        .par_iter()
        .map(|&(alpha, s, x)| {
            let r = limiting_statistic(alpha, ThinningScale::from_x(x, 1), SParam::Finite(s))
                .map(|l| (l.log_l_det - l.log_l_trace).abs());
            check_or_error(format!("trace_vs_det alpha={alpha} s={s} x={x}"), r, tol.route)
        })
        .collect();
    Block {
        name: "bessel_limit",
        checks,
    }
}

pub const SMALL_X: [f64; 3] = [0.05, 0.1, 0.2];

/// Bessel-ODE test grid; it avoids the zeros of `zeta + (4a^2-1)/(4x^2)` for `a` in {0, 0.3, 1}.
pub const ODE_ZETAS: [f64; 5] = [-2.0, -0.5, 0.5, 1.0, 2.0];
pub const ODE_XS: [f64; 4] = [0.05, 0.1, 0.15, 0.2];
/// Points of the full residual; it grows like `x^2` with the leading-order `Phi`.
pub const SCHROEDINGER_XS: [f64; 2] = [0.05, 0.1];

pub fn nonlocal_block(tol: &Tolerances) -> Block {
    let mut checks = Vec::new();
    let small: Vec<_> = SMALL_X.par_iter().map(|&x| small_x_expansion_check(0.0, 1, 0.0, x)).collect();
    match small.into_iter().collect::<hardedge::Result<Vec<_>>>() {
        Ok(v) => {
            checks.push(
                Check::at_most("small_x rel_err x=0.1", v[1].rel_err, tol.small_x_rel)
                    .with_note(format!("numeric {:e}, predicted {:e}", v[1].numeric, v[1].predicted)),
            );
            let errs: Vec<f64> = v.iter().map(|c| c.rel_err).collect();
            let (e, c) = fit_power_law(&SMALL_X, &errs);
            checks.push(
                Check::at_most("small_x error exponent", (e - 2.0).abs(), tol.small_x_exponent)
                    .with_note(format!("fitted exponent {e}, constant {c}")),
            );
        }
        Err(e) => checks.push(Check::errored("small_x", e)),
    }
    let mut ode: f64 = 0.0;
    for alpha in [0.0, 0.3, 1.0] {
        for zeta in ODE_ZETAS {
            for x in ODE_XS {
                ode = ode.max(bessel_ode_residual(alpha, zeta, x));
            }
        }
    }
    checks.push(Check::at_most("bessel_ode", ode, tol.bessel_ode));
    for (s, t) in [(0.0, tol.schroedinger_s0), (30.0, tol.schroedinger_s30)] {
        let r = SCHROEDINGER_XS
            .par_iter()
            .map(|&x| schroedinger_residual(0.0, 1.0, s, x).map(|r| r.relative))
            .collect::<hardedge::Result<Vec<_>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max));
        checks.push(check_or_error(format!("schroedinger s={s}"), r, t));
    }
    Block { name: "nonlocal", checks }
}

/// Fitted exponent of `|n p0 - p_inf|` over [`P0_SIZES`] for `V = x`, `t = 1`, `s = 1`.
pub fn p0_rate_exponent(m: u32) -> hardedge::Result<(f64, Vec<f64>)> {
    let eq = solve_equilibrium(&[0.0, 1.0])?;
    let mut res = Vec::new();
    for n in P0_SIZES {
        let cfg = ModelConfig::laguerre(0.0, m, 1.0, SParam::Finite(1.0), n);
        let v = p0_global_parametrix(&cfg, &eq)?;
        res.push((n as f64 * v.p0 - v.p_inf).abs());
    }
    let ns: Vec<f64> = P0_SIZES.iter().map(|&n| n as f64).collect();
    Ok((fit_power_law(&ns, &res).0, res))
}

pub fn p0_block(tol: &Tolerances) -> Block {
    let mut checks = Vec::new();
    for m in [1u32, 2] {
        let c = match p0_rate_exponent(m) {
            Ok((e, res)) => {
                // |p0 - p_inf/n| carries one more power of 1/n
                let target = -2.0 * m as f64;
                Check::at_most(format!("p0 rate m={m}"), (e - target).abs(), tol.rate_exponent).with_note(format!(
                    "|n p0 - p_inf| exponent {e} (target {target}); |p0 - p_inf/n| exponent {} (target {}); residuals {res:?}",
                    e - 1.0,
                    target - 1.0
                ))
            }
            Err(e) => Check::errored(format!("p0 rate m={m}"), e),
        };
        checks.push(c);
    }
    Block {
        name: "global_parametrix",
        checks,
    }
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    config: &'a ExperimentSpec,
    passed: bool,
    blocks: Vec<Block>,
}

/// Runs every block, writes `report.json` and the potential profile `profile.csv`.
pub fn verify(spec: &ExperimentSpec, out: &Path) -> Result<Outcome> {
    let tol = &spec.tolerances;
    let mut blocks = vec![
        f_beta_block(tol),
        parametrix_block(tol),
        equilibrium_block(tol),
        limit_block(tol),
        nonlocal_block(tol),
        p0_block(tol),
    ];
    let mut files = Vec::new();
    let cfg = &spec.model;
    let profile = match cfg.s {
        SParam::Finite(s) => {
            let x = &spec.grids.x;
            extract_p(cfg.alpha, cfg.m, s, x[0], x[x.len() - 1], spec.orders.profile, tol.profile)
        }
        SParam::PlusInfinity => Err(hardedge::Error::Config("profile needs a finite s".into())),
    };
    let check = match profile {
        Ok(p) => {
            let rows: Vec<Vec<Option<f64>>> = (0..p.x_grid.len())
                .map(|k| {
                    vec![
                        Some(p.x_grid[k]),
                        Some(p.log_l[k]),
                        Some(p.p[k]),
                        Some(p.q[k]),
                        Some(p.expansion_prediction[k]),
                        Some(p.rel_err[k]),
                    ]
                })
                .collect();
            let path = out.join("profile.csv");
            write_csv(&path, &PROFILE_COLUMNS, &rows)?;
            files.push(path);
            Check::at_most("profile node doubling", p.diff_error, tol.profile)
        }
        Err(e) => Check::errored("profile node doubling", e),
    };
    blocks.push(Block {
        name: "profile",
        checks: vec![check],
    });
    let passed = blocks.iter().flat_map(|b| &b.checks).all(|c| c.passed);
    let path = out.join("report.json");
    write_json(
        &path,
        &VerifyReport {
            command: "verify",
            config: spec,
            passed,
            blocks,
        },
    )?;
    files.push(path);
    Ok(Outcome { files, passed })
}
