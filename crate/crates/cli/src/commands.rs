//! Drivers for `kernel`, `statistic`, `mc` and `equilibrium`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Result;
use hardedge::bessel_limit::{hard_edge_bessel_kernel, DiscreteOperator};
use hardedge::mc::{conditional_observable, estimate_l, BatchSummary, SampleBatch};
use hardedge::ops::{
    multiplicative_statistic_deformation_route, multiplicative_statistic_det_route,
    multiplicative_statistic_gamma_route, DeformationOptions, DiscretizationOptions, FiniteEnsemble,
};
use hardedge::specfun::QuadratureRule;
use hardedge::{solve_equilibrium, thinning_scale, EquilibriumData, ModelConfig, SParam};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{write_csv, write_json, write_plot_template, Check, Outcome};
use crate::spec::{Command, ExperimentSpec};

pub const KERNEL_COLUMNS: [&str; 6] = ["u", "v", "bessel", "conditional", "finite_n", "dev_cond_vs_finite"];
pub const STATISTIC_COLUMNS: [&str; 7] = ["s", "logL_gamma", "logL_det", "logL_deform", "logL_limit", "logL_mc", "mc_stderr"];
pub const COUNTING_COLUMNS: [&str; 6] = ["u", "estimate", "stderr", "conditional", "bessel", "ess"];
pub const DENSITY_COLUMNS: [&str; 3] = ["x", "density", "effective_potential"];
pub const PROFILE_COLUMNS: [&str; 6] = ["x", "logL", "p", "q", "expansion_prediction", "rel_err"];

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    config: &'a ExperimentSpec,
    passed: bool,
    #[serde(flatten)]
    body: T,
}

fn finish<T: Serialize>(
    cmd: Command,
    spec: &ExperimentSpec,
    out: &Path,
    name: &str,
    checks_passed: bool,
    body: T,
    mut files: Vec<std::path::PathBuf>,
) -> Result<Outcome> {
    let path = out.join(name);
    write_json(
        &path,
        &Report {
            command: cmd.name(),
            config: spec,
            passed: checks_passed,
            body,
        },
    )?;
    files.push(path);
    Ok(Outcome {
        files,
        passed: checks_passed,
    })
}

/// `int_0^u f(v, v) dv` with 24 Gauss-Legendre nodes.
fn diagonal_integral(u: f64, f: impl Fn(f64) -> hardedge::Result<f64>) -> hardedge::Result<f64> {
    let rule = QuadratureRule::gauss_legendre(24, 0.0, u);
    let mut acc = 0.0;
    for (&v, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(v)?;
    }
    Ok(acc)
}

#[derive(Serialize)]
struct KernelBody {
    max_dev_cond_vs_finite: f64,
    max_dev_cond_vs_bessel: f64,
    checks: Vec<Check>,
}

/// Tabulates the Bessel, limiting conditional and scaled finite-n kernels on `u x u`.
pub fn kernel(spec: &ExperimentSpec, out: &Path) -> Result<Outcome> {
    let cfg = &spec.model;
    let eq = solve_equilibrium(&cfg.v_coeffs)?;
    let scale = thinning_scale(&eq, cfg.t, cfg.m);
    let op = DiscreteOperator::new(cfg.alpha, scale, cfg.s, spec.orders.nystrom)?;
    let ens = FiniteEnsemble::with_equilibrium(cfg, eq.clone(), &DiscretizationOptions::default())?;
    let table = ens.table(cfg.s)?;
    let u = &spec.grids.u;
    let pairs: Vec<(f64, f64)> = u.iter().flat_map(|&a| u.iter().map(move |&b| (a, b))).collect();
    let rows: Vec<[f64; 6]> = pairs
        .par_iter()
        .map(|&(a, b)| -> hardedge::Result<[f64; 6]> {
            let bes = hard_edge_bessel_kernel(cfg.alpha, a, b)?;
            let cond = op.conditional_kernel(a, b)?;
            let fin = table.scaled_hard_edge_kernel(&eq, a, b)?;
            Ok([a, b, bes, cond, fin, ((fin - cond) / cond).abs()])
        })
        .collect::<hardedge::Result<_>>()?;
    let max_fin = rows.iter().map(|r| r[5]).fold(0.0, f64::max);
    let max_bes = rows.iter().map(|r| (r[3] - r[2]).abs()).fold(0.0, f64::max);
    info!("kernel: max relative deviation {max_fin:e}");
    let csv = out.join("kernel.csv");
    write_csv(&csv, &KERNEL_COLUMNS, &rows.iter().map(|r| r.iter().map(|&c| Some(c)).collect()).collect::<Vec<_>>())?;
    let plot = out.join("plot_kernel.py");
    write_plot_template(&plot, "kernel.csv", "u", &["bessel", "conditional", "finite_n"])?;
    let checks = vec![Check::at_most("dev_cond_vs_finite", max_fin, spec.tolerances.kernel_rel)];
    let ok = checks.iter().all(|c| c.passed);
    let body = KernelBody {
        max_dev_cond_vs_finite: max_fin,
        max_dev_cond_vs_bessel: max_bes,
        checks,
    };
    finish(Command::Kernel, spec, out, "summary.json", ok, body, vec![csv, plot])
}

/// One row of the statistic table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticRow {
    pub s: f64,
    pub gamma: f64,
    pub det: f64,
    pub deform: f64,
    pub limit: f64,
    pub mc: Option<(f64, f64)>,
}

impl StatisticRow {
    pub fn max_route_gap(&self) -> f64 {
        let v = [self.gamma, self.det, self.deform];
        let mut gap: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                gap = gap.max((v[i] - v[j]).abs());
            }
        }
        if v.iter().any(|x| x.is_nan()) {
            f64::NAN
        } else {
            gap
        }
    }
}

/// Every route at one `(n, s)`; `batch` is reweighted to `s` when given.
pub fn statistic_row(
    cfg: &ModelConfig,
    eq: &EquilibriumData,
    s: f64,
    nystrom: usize,
    deformation: usize,
    batch: Option<&SampleBatch>,
) -> hardedge::Result<StatisticRow> {
    let c = cfg.with_s(SParam::Finite(s));
    let ens = FiniteEnsemble::with_equilibrium(&c, eq.clone(), &DiscretizationOptions::default())?;
    let gamma = multiplicative_statistic_gamma_route(&ens)?;
    let det = multiplicative_statistic_det_route(&ens)?;
    let deform = multiplicative_statistic_deformation_route(&ens, &DeformationOptions::single_panel(deformation))?.log_l;
    let scale = thinning_scale(eq, cfg.t, cfg.m);
    let limit = DiscreteOperator::new(cfg.alpha, scale, SParam::Finite(s), nystrom)?.log_det();
    let mc = match batch {
        Some(b) => {
            let e = estimate_l(&b.reweighted(&c)?);
            Some((e.mean.ln(), e.stderr / e.mean))
        }
        None => None,
    };
    Ok(StatisticRow {
        s,
        gamma,
        det,
        deform,
        limit,
        mc,
    })
}

#[derive(Serialize)]
struct StatisticBody {
    checks: Vec<Check>,
}

/// `log L` by every route over the s-grid, for each n of the n-list.
pub fn statistic(spec: &ExperimentSpec, out: &Path) -> Result<Outcome> {
    let tol = &spec.tolerances;
    let eq = solve_equilibrium(&spec.model.v_coeffs)?;
    let mut files = Vec::new();
    let mut checks = Vec::new();
    let mut errors_by_n: Vec<(usize, Vec<f64>)> = Vec::new();
    for n in spec.n_list() {
        let cfg = spec.model.with_n(n);
        let batch = if spec.mc.in_statistic {
            Some(SampleBatch::generate(&cfg.with_s(SParam::PlusInfinity), spec.mc.samples, spec.seed)?)
        } else {
            None
        };
        let rows: Vec<StatisticRow> = spec
            .grids
            .s
            .par_iter()
            .map(|&s| statistic_row(&cfg, &eq, s, spec.orders.nystrom, spec.orders.deformation, batch.as_ref()))
            .collect::<hardedge::Result<_>>()?;
        for r in &rows {
            checks.push(Check::at_most(format!("routes n={n} s={}", r.s), r.max_route_gap(), tol.route));
            if let Some((m, se)) = r.mc {
                // compare on the linear scale, where the standard error is exact
                let l = m.exp();
                let resid = (l - r.gamma.exp()).abs() / (se * l);
                checks.push(
                    Check::at_most(format!("mc n={n} s={}", r.s), resid, tol.mc_sigmas)
                        .with_note("deviation in standard errors"),
                );
            }
        }
        errors_by_n.push((n, rows.iter().map(|r| (r.gamma - r.limit).abs()).collect()));
        let path = out.join(format!("statistic_n{n}.csv"));
        let table: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|r| {
                vec![
                    Some(r.s),
                    Some(r.gamma),
                    Some(r.det),
                    Some(r.deform),
                    Some(r.limit),
                    r.mc.map(|m| m.0),
                    r.mc.map(|m| m.1),
                ]
            })
            .collect();
        write_csv(&path, &STATISTIC_COLUMNS, &table)?;
        files.push(path);
    }
    if errors_by_n.len() > 1 {
        for (k, s) in spec.grids.s.iter().enumerate() {
            let errs: Vec<f64> = errors_by_n.iter().map(|(_, e)| e[k]).collect();
            let worst = errs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            checks.push(
                Check::at_most(format!("limit trend s={s}"), worst, 1.0)
                    .with_note("largest ratio of successive |logL_n - logL_limit|; below 1 means decreasing"),
            );
        }
    }
    let plot = out.join("plot_statistic.py");
    let first = format!("statistic_n{}.csv", spec.n_list()[0]);
    write_plot_template(&plot, &first, "s", &STATISTIC_COLUMNS[1..6])?;
    files.push(plot);
    let ok = checks.iter().all(|c| c.passed);
    finish(Command::Statistic, spec, out, "report.json", ok, StatisticBody { checks }, files)
}

#[derive(Serialize)]
struct McBody {
    #[serde(flatten)]
    summary: BatchSummary,
    checks: Vec<Check>,
    warnings: Vec<String>,
}

/// Samples the model, estimates `L_n` and the hard-edge counting function.
pub fn mc(spec: &ExperimentSpec, out: &Path) -> Result<Outcome> {
    let cfg = &spec.model;
    let eq = solve_equilibrium(&cfg.v_coeffs)?;
    let batch = SampleBatch::generate(cfg, spec.mc.samples, spec.seed)?;
    let summary = BatchSummary::new(&batch);
    let scale = thinning_scale(&eq, cfg.t, cfg.m);
    let op = DiscreteOperator::new(cfg.alpha, scale, cfg.s, spec.orders.nystrom)?;
    let n2 = (cfg.n * cfg.n) as f64;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    for &u in &spec.grids.u {
        let cut = u / (eq.c_v * n2);
        let est = conditional_observable(&batch, |x| if x <= cut { 1.0 } else { 0.0 })?;
        let cond = diagonal_integral(u, |v| op.conditional_kernel(v, v))?;
        let bes = diagonal_integral(u, |v| hard_edge_bessel_kernel(cfg.alpha, v, v))?;
        checks.push(
            Check::at_most(format!("counting u={u}"), (est.value - cond).abs() / est.stderr, spec.tolerances.mc_sigmas)
                .with_note("deviation from the conditional-kernel integral in standard errors"),
        );
        if let Some(w) = &est.warning {
            warnings.push(format!("u={u}: {w}"));
        }
        rows.push(vec![Some(u), Some(est.value), Some(est.stderr), Some(cond), Some(bes), Some(est.ess)]);
    }
    let mut files = Vec::new();
    let csv = out.join("counting.csv");
    write_csv(&csv, &COUNTING_COLUMNS, &rows)?;
    files.push(csv);
    if spec.mc.raw_dump {
        let raw = out.join("eigenvalues.f64");
        let mut w = BufWriter::new(File::create(&raw)?);
        batch.write_raw(&mut w)?;
        std::io::Write::flush(&mut w)?;
        files.push(raw);
    }
    let plot = out.join("plot_counting.py");
    write_plot_template(&plot, "counting.csv", "u", &["estimate", "conditional", "bessel"])?;
    files.push(plot);
    let ok = checks.iter().all(|c| c.passed);
    let body = McBody {
        summary,
        checks,
        warnings,
    };
    finish(Command::Mc, spec, out, "batch_summary.json", ok, body, files)
}

/// Invariant checks on a solved equilibrium problem.
pub fn equilibrium_checks(eq: &EquilibriumData, tol_values: f64, tol_el: f64) -> Vec<Check> {
    let tag = format!("V={:?}", eq.v_coeffs);
    let mut checks = Vec::new();
    let mass = std::f64::consts::PI * eq.angular_coefficients()[0];
    checks.push(Check::at_most(format!("{tag} mass"), (mass - 1.0).abs(), tol_values));
    let e0 = eq.effective_potential(0.5 * eq.a);
    let on = (1..200)
        .map(|k| (eq.effective_potential(eq.a * k as f64 / 200.0) - e0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(format!("{tag} euler_lagrange_sup"), on, tol_el));
    // strict inequality beyond the support; the residual is the largest excess over the constant
    let off = (1..=100)
        .map(|k| eq.effective_potential(eq.a * (1.0 + 0.02 * k as f64)) - e0)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check {
        passed: off < 0.0,
        ..Check::at_most(format!("{tag} strict_outside"), off, 0.0)
    });
    if eq.v_coeffs == [0.0, 1.0] {
        checks.push(Check::at_most("V=x a", (eq.a - 4.0).abs(), tol_values));
        checks.push(Check::at_most("V=x kappa0", (eq.kappa0 - std::f64::consts::FRAC_1_PI).abs(), tol_values));
        checks.push(Check::at_most("V=x c_V", (eq.c_v - 1.0).abs(), tol_values));
    }
    checks
}

#[derive(Serialize)]
struct EquilibriumBody {
    equilibrium: EquilibriumData,
    checks: Vec<Check>,
}

/// Solves the equilibrium problem of `model.V_coeffs`.
pub fn equilibrium(spec: &ExperimentSpec, out: &Path) -> Result<Outcome> {
    let eq = solve_equilibrium(&spec.model.v_coeffs)?;
    let checks = equilibrium_checks(&eq, spec.tolerances.equilibrium, spec.tolerances.euler_lagrange);
    let rows: Vec<Vec<Option<f64>>> = (1..=300)
        .map(|k| {
            let x = 1.5 * eq.a * k as f64 / 300.0;
            vec![Some(x), Some(eq.density(x)), Some(eq.effective_potential(x))]
        })
        .collect();
    let csv = out.join("density.csv");
    write_csv(&csv, &DENSITY_COLUMNS, &rows)?;
    let plot = out.join("plot_density.py");
    write_plot_template(&plot, "density.csv", "x", &["density"])?;
    let ok = checks.iter().all(|c| c.passed);
    let body = EquilibriumBody { equilibrium: eq, checks };
    finish(Command::Equilibrium, spec, out, "equilibrium.json", ok, body, vec![csv, plot])
}
