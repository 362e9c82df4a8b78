//! Config-driven experiment runner behind the `mlyap` binary.

pub mod config;
pub mod output;
pub mod repro;

use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::analysis::{legendre, stationary_density};
use crate::bounds::{
    asymptotic_constants, check_growth, find_admissible, lower_bound, scan_grid, upper_bound, LimitConstant,
    LyapunovWeight, PitchforkParams, Scenario, WeightFamily,
};
use crate::error::{BoundsError, Error};
use crate::fkmc::{clt_sample, lambda_curve, mdp_lmgf, estimate_lambda};
use crate::model::{build_model, ModelSpec, SdeModel, State};
use crate::pathsim::{with_threads, RngPolicy};
use crate::spectral::{refine_and_validate, solve, GridSpec, SolverOptions, SpectralResult};

use config::{ConfigError, Entry, RawConfig, SpectralConfig, WeightSetting};
use output::{num, opt_num, Artifacts, Manifest};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    LambdaMc,
    LambdaSpectral,
    Bounds,
    GrowthCheck,
    RateFunction,
    Clt,
    Mdp,
    Asymptotics,
    Crosscheck,
    Repro,
}

impl Subcommand {
    pub const ALL: [(&'static str, Subcommand); 10] = [
        ("lambda-mc", Subcommand::LambdaMc),
        ("lambda-spectral", Subcommand::LambdaSpectral),
        ("bounds", Subcommand::Bounds),
        ("growth-check", Subcommand::GrowthCheck),
        ("rate-function", Subcommand::RateFunction),
        ("clt", Subcommand::Clt),
        ("mdp", Subcommand::Mdp),
        ("asymptotics", Subcommand::Asymptotics),
        ("crosscheck", Subcommand::Crosscheck),
        ("repro", Subcommand::Repro),
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(n, _)| *n == s).map(|(_, c)| *c)
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, c)| *c == self).map(|(n, _)| *n).unwrap()
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Positional arguments after the subcommand.
    pub args: Vec<String>,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
    Failed(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Failed(_) => 1,
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Model(_) | Error::Io(_) | Error::Csv(_) => RunError::Config(e.to_string()),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

macro_rules! numerical {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}
numerical!(
    crate::error::ModelError,
    crate::error::FkmcError,
    crate::error::SpectralError,
    crate::error::BoundsError,
    crate::error::AnalysisError,
    std::io::Error
);

/// Runs one subcommand, printing a report to `out`.
pub fn run(sub: Subcommand, opts: &RunOptions, out: &mut dyn Write) -> Result<(), RunError> {
    if sub == Subcommand::Repro {
        return repro::run_named(opts, out);
    }
    let start = Instant::now();
    let mut cfg = match &opts.config {
        Some(p) => RawConfig::read(p)?,
        None if sub == Subcommand::Crosscheck => RawConfig::default(),
        None => return Err(RunError::Config("--config is required".into())),
    };
    if sub == Subcommand::Crosscheck {
        apply_positional(&mut cfg, &opts.args)?;
    } else if let Some(a) = opts.args.first() {
        return Err(RunError::Config(format!("unexpected argument `{a}`")));
    }
    if let Some(s) = opts.seed {
        cfg = cfg.with_seed(s);
    }
    let oc = config::output_config(&cfg)?;
    let dir = opts
        .out
        .clone()
        .or_else(|| oc.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let spec = config::model_spec(&cfg)?;
    let model = build_model(&spec)?;
    let mut art = Artifacts::new(&dir, oc.svg)?;
    let threads = opts.threads;
    let mut buf: Vec<u8> = Vec::new();
    let w = &mut buf;
    let result = with_threads(threads, || -> Result<(), RunError> {
        match sub {
            Subcommand::LambdaMc => cmd_lambda_mc(&cfg, &model, &mut art, w),
            Subcommand::LambdaSpectral => cmd_lambda_spectral(&cfg, &model, &mut art, w),
            Subcommand::Bounds => cmd_bounds(&cfg, &model, &mut art, w),
            Subcommand::GrowthCheck => cmd_growth(&cfg, &model, &mut art, w),
            Subcommand::RateFunction => cmd_rate(&cfg, &model, &mut art, w),
            Subcommand::Clt => cmd_clt(&cfg, &model, &mut art, w),
            Subcommand::Mdp => cmd_mdp(&cfg, &model, &mut art, w),
            Subcommand::Asymptotics => cmd_asymptotics(&cfg, &spec, &mut art, w),
            Subcommand::Crosscheck => cmd_crosscheck(&cfg, &model, &mut art, w),
            Subcommand::Repro => unreachable!(),
        }
    });
    out.write_all(&buf)?;
    result?;
    let seed = cfg.section("mc").and_then(|s| s.u64("seed").ok().flatten());
    art.manifest(Manifest {
        subcommand: sub.name().into(),
        config: serde_json::to_value(&cfg).unwrap_or_default(),
        seed,
        threads,
        version: env!("CARGO_PKG_VERSION").into(),
        rustc_target: std::env::consts::ARCH.into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        files: Vec::new(),
    })?;
    writeln!(out, "artifacts written to {}", dir.display())?;
    Ok(())
}

/// `crosscheck <model> [key=value ...]` without a config file.
fn apply_positional(cfg: &mut RawConfig, args: &[String]) -> Result<(), RunError> {
    for a in args {
        let (sec, key, value) = match a.split_once('=') {
            Some(("p", v)) => ("analysis", "p", v),
            Some((k, v)) => match k.split_once('.') {
                Some((s, k)) => (s, k, v),
                None => ("model", k, v),
            },
            None => ("model", "model", a.as_str()),
        };
        let section = cfg.sections.entry(sec.to_string()).or_default();
        section.entries.insert(key.to_string(), Entry { value: value.to_string(), line: 0 });
    }
    Ok(())
}

fn start_state(x0: f64) -> State {
    [x0, 0.0, 0.0]
}

fn cmd_lambda_mc(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let mc = config::mc_config(cfg)?;
    let curve = lambda_curve(
        model,
        &mc.p_grid,
        mc.t,
        start_state(mc.x0),
        mc.n_paths,
        mc.n_steps,
        &RngPolicy::new(mc.seed),
    )?;
    let rows: Vec<Vec<String>> = curve
        .estimates
        .iter()
        .map(|e| {
            vec![
                num(e.p),
                num(e.t),
                num(e.lambda_t),
                num(e.se_lambda),
                num(e.dlambda_t),
                num(e.d2lambda_t),
                num(e.ess),
                e.n_blowups.to_string(),
            ]
        })
        .collect();
    art.csv("mc.csv", &MC_HEADER, &rows)?;
    let pts: Vec<(f64, f64)> = curve.estimates.iter().map(|e| (e.p, e.lambda_t)).collect();
    art.plot("mc.svg", &format!("{} Monte Carlo", model.label()), "p", "Lambda_t(p)", &[("MC", pts)])?;
    for e in &curve.estimates {
        let mut flags = String::new();
        if e.low_confidence {
            flags.push_str(" low-confidence");
        }
        if e.near_critical {
            flags.push_str(" near-critical");
        }
        writeln!(out, "p = {:>8.4}  lambda_t = {:.6} ± {:.6}  ess = {:.1}{flags}", e.p, e.lambda_t, e.se_lambda, e.ess)?;
    }
    writeln!(out, "max convexity violation {:.3e}", curve.max_convexity_violation)?;
    Ok(())
}

pub const MC_HEADER: [&str; 8] = ["p", "t", "lambda_t", "se", "dlambda_t", "d2lambda_t", "ess", "n_blowups"];
pub const SPECTRAL_HEADER: [&str; 7] = ["p", "lambda", "residual", "gap_estimate", "n", "x_max", "weight_params"];
pub const EIGEN_HEADER: [&str; 4] = ["x", "h", "V", "phi"];
pub const BOUNDS_HEADER: [&str; 6] = ["p", "gamma_sup", "tail_verdict", "upper", "lower", "spectral_lambda"];
pub const RATE_HEADER: [&str; 4] = ["s", "I", "argmax_p", "boundary_limited"];

/// Grid for a spectral solve, with the default half-width `6·scale`.
pub fn spectral_grid(model: &SdeModel, sc: &SpectralConfig) -> GridSpec {
    if sc.circle || model.is_circle() {
        GridSpec::circle(sc.n)
    } else {
        GridSpec::interval(sc.x_max.unwrap_or(6.0 * model.domain_scale()), sc.n)
    }
}

fn resolve_weight(model: &SdeModel, w: &WeightSetting, p: f64) -> Result<LyapunovWeight, BoundsError> {
    match *w {
        _ if model.is_circle() => Ok(LyapunovWeight::UNIT),
        WeightSetting::Fixed(WeightFamily::Unit, _) | WeightSetting::Auto(WeightFamily::Unit) => Ok(LyapunovWeight::UNIT),
        WeightSetting::Fixed(f, v) => Ok(LyapunovWeight::new(f, v)),
        WeightSetting::Auto(f) => find_admissible(model, f, p),
    }
}

/// Spectral solve at one `p` as configured.
pub fn spectral_point(model: &SdeModel, sc: &SpectralConfig, p: f64) -> Result<SpectralResult, RunError> {
    let grid = spectral_grid(model, sc);
    let w = resolve_weight(model, &sc.weight, p).map_err(|e| {
        RunError::Numerical(format!("no admissible weight at p = {p}: {e}"))
    })?;
    let opts = SolverOptions { tol: sc.tol, ..SolverOptions::default() };
    if sc.refine {
        Ok(refine_and_validate(model, p, &w, &grid, &opts)?.0)
    } else {
        Ok(solve(model, p, &grid, &w, &opts)?)
    }
}

fn spectral_points(model: &SdeModel, sc: &SpectralConfig, ps: &[f64]) -> Result<Vec<SpectralResult>, RunError> {
    ps.par_iter().map(|&p| spectral_point(model, sc, p)).collect()
}

fn cmd_lambda_spectral(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let sc = config::spectral_config(cfg)?;
    let res = spectral_points(model, &sc, &sc.p_grid)?;
    let rows: Vec<Vec<String>> = res
        .iter()
        .map(|r| {
            vec![
                num(r.p),
                num(r.lambda),
                num(r.residual),
                num(r.gap_estimate),
                r.grid.n.to_string(),
                opt_num(r.grid.x_max()),
                r.weight.params_string(),
            ]
        })
        .collect();
    art.csv("spectral.csv", &SPECTRAL_HEADER, &rows)?;
    let pts: Vec<(f64, f64)> = res.iter().map(|r| (r.p, r.lambda)).collect();
    art.plot("spectral.svg", &format!("{} principal eigenvalue", model.label()), "p", "Lambda(p)", &[("spectral", pts)])?;
    for r in &res {
        writeln!(out, "p = {:>8.4}  lambda = {:.8}  residual = {:.2e}  gap = {:.4}", r.p, r.lambda, r.residual, r.gap_estimate)?;
        if sc.eigenfunction {
            let name = format!("eigenfunction_p{}.csv", r.p);
            let ef = r.eigenfunction();
            let rows: Vec<Vec<String>> = ef.iter().map(|v| v.iter().map(|&x| num(x)).collect()).collect();
            art.csv(&name, &EIGEN_HEADER, &rows)?;
            let pts: Vec<(f64, f64)> = ef.iter().map(|v| (v[0], v[3])).collect();
            art.plot(&format!("eigenfunction_p{}.svg", r.p), "principal eigenfunction", "x", "phi", &[("phi", pts)])?;
        }
    }
    Ok(())
}

fn scan_for(bc: &config::BoundsConfig) -> Vec<f64> {
    scan_grid(bc.scan_x_max, bc.scan_n)
}

fn cmd_bounds(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let bc = config::bounds_config(cfg)?;
    let sc = cfg.section("spectral").map(|_| config::spectral_config(cfg)).transpose()?;
    let scan = scan_for(&bc);
    let mut rows = Vec::new();
    let mut series = (Vec::new(), Vec::new(), Vec::new());
    for &p in &bc.p_ladder {
        let weight = match bc.weight_param {
            Some(g) => Some(LyapunovWeight::new(bc.family, g)),
            None => match upper_bound(model, p, bc.family) {
                Ok(u) => Some(u.weight),
                Err(BoundsError::NoAdmissibleParameter { .. }) => None,
                Err(e) => return Err(e.into()),
            },
        };
        let report = weight.map(|w| check_growth(model, &w, p, &scan)).transpose()?;
        let upper = report.as_ref().filter(|r| r.cond1).map(|r| r.gamma_sup);
        let lower = match lower_bound(model, p, bc.a_grid.as_deref()) {
            Ok(l) => Some(l.value),
            Err(BoundsError::UnsupportedModel(_) | BoundsError::NoAdmissibleParameter { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let spec = sc.as_ref().map(|sc| spectral_point(model, sc, p)).transpose()?.map(|r| r.lambda);
        let verdict = if report.as_ref().is_some_and(|r| r.cond1) { "pass" } else { "fail" };
        writeln!(
            out,
            "p = {p}: {} <= lambda <= {}{}",
            lower.map_or("-".into(), |v| format!("{v:.4}")),
            upper.map_or("-".into(), |v| format!("{v:.4}")),
            spec.map_or(String::new(), |v| format!("  (spectral {v:.4})"))
        )?;
        if let Some(u) = upper {
            series.0.push((p, u));
        }
        if let Some(l) = lower {
            series.1.push((p, l));
        }
        if let Some(s) = spec {
            series.2.push((p, s));
        }
        rows.push(vec![
            num(p),
            opt_num(report.as_ref().map(|r| r.gamma_sup)),
            verdict.into(),
            opt_num(upper),
            opt_num(lower),
            opt_num(spec),
        ]);
    }
    art.csv("bounds.csv", &BOUNDS_HEADER, &rows)?;
    art.plot(
        "bounds.svg",
        &format!("{} bounds", model.label()),
        "p",
        "Lambda(p)",
        &[("upper", series.0), ("lower", series.1), ("spectral", series.2)],
    )?;
    Ok(())
}

fn cmd_growth(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let bc = config::bounds_config(cfg)?;
    let scan = scan_for(&bc);
    let header = [
        "p", "weight_params", "gamma_sup", "scan_sup", "tail_trend", "cond0", "cond1", "cond2", "beta2", "cond3", "beta3",
        "admissible",
    ];
    let mut rows = Vec::new();
    for &p in &bc.p_ladder {
        let weight = match bc.weight_param {
            Some(g) => Ok(LyapunovWeight::new(bc.family, g)),
            None if bc.family == WeightFamily::Unit => Ok(LyapunovWeight::UNIT),
            None => find_admissible(model, bc.family, p),
        };
        match weight {
            Ok(w) => {
                let r = check_growth(model, &w, p, &scan)?;
                writeln!(
                    out,
                    "p = {p}: {w}  sup L_pV/V = {:.6}  (0) {} (1) {} (2) {} (3) {}  => {}",
                    r.gamma_sup,
                    r.cond0.pass,
                    r.cond1,
                    r.cond2.pass,
                    r.cond3.pass,
                    if r.admissible() { "admissible" } else { "not admissible" }
                )?;
                rows.push(vec![
                    num(p),
                    w.params_string(),
                    num(r.gamma_sup),
                    num(r.scan_sup),
                    num(r.tail_trend),
                    r.cond0.pass.to_string(),
                    r.cond1.to_string(),
                    r.cond2.pass.to_string(),
                    opt_num(r.cond2.beta),
                    r.cond3.pass.to_string(),
                    opt_num(r.cond3.beta),
                    r.admissible().to_string(),
                ]);
            }
            Err(BoundsError::NoAdmissibleParameter { family, .. }) => {
                writeln!(out, "p = {p}: no admissible {family} parameter")?;
                let mut row = vec![num(p), family, String::new(), String::new(), String::new()];
                row.extend(["", "false", "", "", "", ""].map(String::from));
                row.push("false".into());
                rows.push(row);
            }
            Err(e) => return Err(e.into()),
        }
    }
    art.csv("growth.csv", &header, &rows)?;
    Ok(())
}

fn cmd_rate(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let sc = config::spectral_config(cfg)?;
    let ac = config::analysis_config(cfg)?;
    let res = spectral_points(model, &sc, &ac.p_grid)?;
    let samples: Vec<(f64, f64)> = res.iter().map(|r| (r.p, r.lambda)).collect();
    let table = legendre(&samples, &ac.s_grid, sc.tol.max(1e-9))?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| vec![num(r.s), num(r.i), num(r.argmax_p), r.boundary_limited.to_string()])
        .collect();
    art.csv("rate_function.csv", &RATE_HEADER, &rows)?;
    let pts: Vec<(f64, f64)> = table.rows.iter().filter(|r| !r.boundary_limited).map(|r| (r.s, r.i)).collect();
    art.plot("rate_function.svg", &format!("{} rate function", model.label()), "s", "I(s)", &[("I", pts)])?;
    for r in &table.rows {
        writeln!(
            out,
            "I({}) = {:.6}  at p = {:.4}{}",
            r.s,
            r.i,
            r.argmax_p,
            if r.boundary_limited { "  boundary-limited" } else { "" }
        )?;
    }
    Ok(())
}

fn lambda_reference(model: &SdeModel, given: Option<f64>) -> Result<f64, RunError> {
    match given {
        Some(v) => Ok(v),
        None => Ok(crate::analysis::lambda_as(model)?),
    }
}

fn cmd_clt(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let mc = config::mc_config(cfg)?;
    let ac = config::analysis_config(cfg)?;
    let lref = lambda_reference(model, ac.lambda_ref)?;
    let c = clt_sample(
        model,
        mc.t,
        start_state(mc.x0),
        mc.n_paths,
        mc.n_steps,
        &RngPolicy::new(mc.seed),
        lref,
        ac.variance_ref,
    )?;
    let header = ["t", "n_paths", "lambda_ref", "mean", "variance", "variance_ref", "ks", "n_blowups"];
    let row = vec![
        num(mc.t),
        mc.n_paths.to_string(),
        num(lref),
        num(c.mean),
        num(c.variance),
        opt_num(ac.variance_ref),
        opt_num(c.ks),
        c.n_blowups.to_string(),
    ];
    art.csv("clt.csv", &header, &[row])?;
    let z: Vec<Vec<String>> = c.z.iter().map(|&v| vec![num(v)]).collect();
    art.csv("clt_samples.csv", &["z"], &z)?;
    writeln!(
        out,
        "(A_t - t*{lref:.6})/sqrt(t): mean {:.5}  variance {:.5}{}",
        c.mean,
        c.variance,
        c.ks.map_or(String::new(), |k| format!("  KS {k:.4}"))
    )?;
    Ok(())
}

fn cmd_mdp(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let mc = config::mc_config(cfg)?;
    let ac = config::analysis_config(cfg)?;
    let lref = lambda_reference(model, ac.lambda_ref)?;
    let e = mdp_lmgf(
        model,
        mc.t,
        start_state(mc.x0),
        ac.beta_exp,
        ac.p,
        mc.n_paths,
        mc.n_steps,
        &RngPolicy::new(mc.seed),
        lref,
    )?;
    let header = ["t", "b_t", "a_t", "p", "lambda_ref", "value", "reference", "ess", "low_confidence"];
    let reference = ac.variance_ref.map(|v| 0.5 * ac.p * ac.p * v);
    art.csv(
        "mdp.csv",
        &header,
        &[vec![
            num(mc.t),
            num(e.b_t),
            num(e.a_t),
            num(ac.p),
            num(lref),
            num(e.value),
            opt_num(reference),
            num(e.ess),
            e.low_confidence.to_string(),
        ]],
    )?;
    writeln!(
        out,
        "scaled log-mgf at p = {}: {:.6}{}  (ess {:.1})",
        ac.p,
        e.value,
        reference.map_or(String::new(), |r| format!(" vs p^2 var/2 = {r:.6}")),
        e.ess
    )?;
    Ok(())
}

fn cmd_asymptotics(cfg: &RawConfig, spec: &ModelSpec, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let bc = config::bounds_config(cfg)?;
    let (scenario, prm) = match *spec {
        ModelSpec::PitchforkQ2 { a, b, sigma } => (Scenario::Q2, PitchforkParams { a, b, sigma }),
        ModelSpec::PitchforkQ4 { a, b, sigma } => (Scenario::Q4, PitchforkParams { a, b, sigma }),
        ModelSpec::PitchforkCorr { a, b, sigma, rho } => (Scenario::ItoX { rho }, PitchforkParams { a, b, sigma }),
        _ => return Err(RunError::Config("asymptotics needs a pitchfork_q2, pitchfork_q4 or pitchfork_corr model".into())),
    };
    let rep = asymptotic_constants(scenario, prm, &bc.ladder)?;
    let (lo, hi) = match rep.limit {
        LimitConstant::Value(v) => (v, v),
        LimitConstant::Interval(l, h) => (l, h),
    };
    let header = ["p", "upper", "lower", "upper_scaled", "lower_scaled", "limit_lo", "limit_hi"];
    let rows: Vec<Vec<String>> = rep
        .ladder
        .iter()
        .map(|r| vec![num(r.p), num(r.upper), num(r.lower), num(r.upper_scaled), num(r.lower_scaled), num(lo), num(hi)])
        .collect();
    art.csv("asymptotics.csv", &header, &rows)?;
    art.plot(
        "asymptotics.svg",
        "scaled bounds",
        "p",
        &format!("bound / p^{}", rep.exponent),
        &[
            ("upper", rep.ladder.iter().map(|r| (r.p, r.upper_scaled)).collect()),
            ("lower", rep.ladder.iter().map(|r| (r.p, r.lower_scaled)).collect()),
        ],
    )?;
    for r in &rep.ladder {
        writeln!(out, "p = {:>8}: {:.6} <= Lambda/p^{} <= {:.6}", r.p, r.lower_scaled, rep.exponent, r.upper_scaled)?;
    }
    writeln!(out, "limit constant in [{lo:.6}, {hi:.6}]; gap shrinks: {}", rep.gap_shrinks)?;
    Ok(())
}

fn cmd_crosscheck(cfg: &RawConfig, model: &SdeModel, art: &mut Artifacts, out: &mut dyn Write) -> Result<(), RunError> {
    let mut cfg = cfg.clone();
    for s in ["spectral", "bounds"] {
        cfg.sections.entry(s.into()).or_default();
    }
    let p = match cfg.section("analysis") {
        Some(s) => s.f64("p")?,
        None => None,
    }
    .ok_or_else(|| RunError::Config("crosscheck needs p (p=VALUE or [analysis] p)".into()))?;
    let sc = config::spectral_config(&cfg)?;
    let bc = config::bounds_config(&cfg)?;
    let spec = spectral_point(model, &sc, p)?;
    let upper = match upper_bound(model, p, bc.family) {
        Ok(u) => Some(u.value),
        Err(BoundsError::NoAdmissibleParameter { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let lower = match lower_bound(model, p, bc.a_grid.as_deref()) {
        Ok(l) => Some(l.value),
        Err(BoundsError::UnsupportedModel(_) | BoundsError::NoAdmissibleParameter { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mc = match cfg.section("mc") {
        Some(_) => {
            let m = config::mc_config(&cfg)?;
            Some(estimate_lambda(model, p, m.t, start_state(m.x0), m.n_paths, m.n_steps, &RngPolicy::new(m.seed))?)
        }
        None => None,
    };
    let inside = lower.is_none_or(|l| l <= spec.lambda) && upper.is_none_or(|u| spec.lambda <= u);
    writeln!(
        out,
        "{} p={p}: {} <= lambda <= {}; lambda_spec = {:.4} {}",
        model.label(),
        lower.map_or("-inf".into(), |v| format!("{v:.2}")),
        upper.map_or("+inf".into(), |v| format!("{v:.2}")),
        spec.lambda,
        if inside { "inside" } else { "OUTSIDE" }
    )?;
    if let Some(e) = &mc {
        writeln!(out, "lambda_mc(t = {}) = {:.4} ± {:.4}", e.t, e.lambda_t, e.se_lambda)?;
    }
    art.csv(
        "crosscheck.csv",
        &["p", "lambda_mc", "se", "lambda_spec", "lower", "upper", "inside"],
        &[vec![
            num(p),
            opt_num(mc.as_ref().map(|e| e.lambda_t)),
            opt_num(mc.as_ref().map(|e| e.se_lambda)),
            num(spec.lambda),
            opt_num(lower),
            opt_num(upper),
            inside.to_string(),
        ]],
    )?;
    if let Ok(d) = stationary_density(model) {
        let pts: Vec<(f64, f64)> = d.nodes.iter().zip(&d.density).step_by(20).map(|(&x, &r)| (x, r)).collect();
        art.plot("stationary_density.svg", "stationary density", "x", "rho", &[("rho", pts)])?;
    }
    Ok(())
}
