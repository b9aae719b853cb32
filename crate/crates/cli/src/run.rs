//! Argument definitions and dispatch for the `mlfrac` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlfrac::identities::{
    default_sweep, run_identity, verify_caputo_ibp, verify_caputo_rl_relation,
    verify_ibp_derivatives, verify_ibp_integrals, verify_inverse_and_fundamental, IDENTITY_IDS,
};
use mlfrac::operators::{ab_integral, abc_derivative, abr_derivative, rl_derivative, rl_integral};
use mlfrac::variational::{solve_free_particle, solve_quadratic_potential};
use mlfrac::{
    FracOrder, GridFunction, IdentityReport, MlParams, RealFunction, Side, SolverConfig,
    VerifyConfig,
};
use serde_json::json;
use thiserror::Error;

use crate::expr::{parse_expr, ParseError};

#[derive(Debug, Parser)]
#[command(
    name = "mlfrac",
    version,
    about = "Fractional operators with Mittag-Leffler kernels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E^γ_{ρ,μ}(z).
    Ml(MlArgs),
    /// Fractional integral of an expression on a grid.
    Integ(OpArgs<IntegOp>),
    /// Fractional derivative of an expression on a grid.
    Deriv(OpArgs<DerivOp>),
    /// Run identity checks; without --id, the full default sweep.
    Verify(VerifyArgs),
    /// Solve one of the Euler-Lagrange examples.
    #[command(name = "solve-el")]
    SolveEl(SolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct MlArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    /// Plain value when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegOp {
    RlLeft,
    RlRight,
    AbLeft,
    AbRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DerivOp {
    AbcLeft,
    AbcRight,
    AbrLeft,
    AbrRight,
    RlLeft,
    RlRight,
}

/// An operator applied at a point.
pub trait PointOp: ValueEnum + Clone + Send + Sync + 'static {
    fn apply(
        self,
        f: &RealFunction,
        ord: &FracOrder,
        t: f64,
        cfg: &VerifyConfig,
    ) -> mlfrac::Result<f64>;
}

impl PointOp for IntegOp {
    fn apply(
        self,
        f: &RealFunction,
        ord: &FracOrder,
        t: f64,
        cfg: &VerifyConfig,
    ) -> mlfrac::Result<f64> {
        let q = &cfg.quad;
        match self {
            IntegOp::RlLeft => rl_integral(Side::Left, f, ord.alpha(), t, q),
            IntegOp::RlRight => rl_integral(Side::Right, f, ord.alpha(), t, q),
            IntegOp::AbLeft => ab_integral(Side::Left, f, ord, t, q),
            IntegOp::AbRight => ab_integral(Side::Right, f, ord, t, q),
        }
    }
}

impl PointOp for DerivOp {
    fn apply(
        self,
        f: &RealFunction,
        ord: &FracOrder,
        t: f64,
        cfg: &VerifyConfig,
    ) -> mlfrac::Result<f64> {
        let q = &cfg.quad;
        match self {
            DerivOp::AbcLeft => abc_derivative(Side::Left, f, ord, t, q),
            DerivOp::AbcRight => abc_derivative(Side::Right, f, ord, t, q),
            DerivOp::AbrLeft => abr_derivative(Side::Left, f, ord, t, q),
            DerivOp::AbrRight => abr_derivative(Side::Right, f, ord, t, q),
            DerivOp::RlLeft => rl_derivative(Side::Left, f, ord.alpha(), t, q),
            DerivOp::RlRight => rl_derivative(Side::Right, f, ord.alpha(), t, q),
        }
    }
}

#[derive(Debug, Args)]
pub struct OpArgs<O: PointOp> {
    #[arg(long = "op", value_enum)]
    pub op: O,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long = "B", default_value_t = 1.0, allow_hyphen_values = true)]
    pub b_norm: f64,
    /// `a:b`
    #[arg(long, default_value = "0:1", value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: (f64, f64),
    #[arg(long = "fn")]
    pub function: String,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One identity; the default sweep when omitted.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(IDENTITY_IDS.iter().copied()))]
    pub id: Option<String>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long = "B", default_value_t = 1.0, allow_hyphen_values = true)]
    pub b_norm: f64,
    /// First function for the identities that take one (used with --id).
    #[arg(long = "fn")]
    pub function: Option<String>,
    /// Second function for the two-function identities.
    #[arg(long = "gn")]
    pub second: Option<String>,
    #[arg(long, default_value = "0:1", value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: (f64, f64),
    /// Number of comparison-grid points for pointwise identities.
    #[arg(long, default_value_t = 9)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    FreeParticle,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub problem: Problem,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long = "B", default_value_t = 1.0, allow_hyphen_values = true)]
    pub b_norm: f64,
    /// `0:b`; the examples start at 0.
    #[arg(long, default_value = "0:1", value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: (f64, f64),
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub y0: f64,
    /// Potential strength of the quadratic problem.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub c: f64,
    /// Free-particle amplitude.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected a:b, got '{s}'"))?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|e| format!("bad left endpoint '{a}': {e}"))?;
    let b: f64 = b
        .trim()
        .parse()
        .map_err(|e| format!("bad right endpoint '{b}': {e}"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("interval needs finite a < b, got {a}:{b}"));
    }
    Ok((a, b))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("expression: {0}")]
    Expr(#[from] ParseError),
    #[error("{0}")]
    Numeric(#[from] mlfrac::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} verification reports failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed { .. } => 1,
            CliError::Usage(_) | CliError::Expr(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn order(alpha: f64, b_norm: f64) -> Result<FracOrder, CliError> {
    FracOrder::new(alpha, b_norm).map_err(usage)
}

fn points(grid: usize) -> Result<usize, CliError> {
    if grid < 3 {
        return Err(usage(format!("--grid must be at least 3, got {grid}")));
    }
    Ok(grid)
}

/// Report tolerance, overridable through `MLFRAC_TOL`.
pub fn verify_config() -> Result<VerifyConfig, CliError> {
    let mut cfg = VerifyConfig::default();
    if let Ok(raw) = std::env::var("MLFRAC_TOL") {
        let tol: f64 = raw
            .trim()
            .parse()
            .map_err(|_| usage(format!("MLFRAC_TOL must be a number, got '{raw}'")))?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(usage(format!("MLFRAC_TOL must be positive, got {tol}")));
        }
        cfg.tol = tol;
    }
    Ok(cfg)
}

/// Parses `text` and probes it at interior points of `[a, b]`, so a domain
/// violation is reported in terms of `x` rather than as a failed quadrature.
/// Endpoint singularities are left to the operators.
fn function(text: &str, a: f64, b: f64) -> Result<RealFunction, CliError> {
    const PROBES: usize = 64;
    let e = parse_expr(text)?;
    for i in 1..PROBES {
        let x = a + (b - a) * i as f64 / PROBES as f64;
        e.eval(x)
            .map_err(|err| CliError::Numeric(mlfrac::Error::Domain(format!("{text}: {err}"))))?;
    }
    Ok(e.to_function(a, b)?)
}

/// 17 significant digits, `.` separator, independent of locale.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,value` rows; singular nodes and non-finite values as `sing(v)`.
pub fn grid_csv(g: &GridFunction) -> String {
    let mut out = String::from("t,value\n");
    for (i, (t, v)) in g.ts().into_iter().zip(&g.values).enumerate() {
        let value = if g.singular.contains(&i) || !v.is_finite() {
            format!("sing({})", fmt_num(*v))
        } else {
            fmt_num(*v)
        };
        out.push_str(&format!("{},{value}\n", fmt_num(t)));
    }
    out
}

fn grid_json(g: &GridFunction, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "interval": [g.a, g.b],
        "t": g.ts(),
        "value": g.values,
        "singular": g.singular,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ml(a) => run_ml(a),
        Command::Integ(a) => run_op(a),
        Command::Deriv(a) => run_op(a),
        Command::Verify(a) => run_verify(a),
        Command::SolveEl(a) => run_solve(a),
    }
}

fn run_ml(a: MlArgs) -> Result<(), CliError> {
    let p = MlParams::new(a.rho, a.mu, a.gamma).map_err(usage)?;
    if !a.z.is_finite() {
        return Err(usage("--z must be finite"));
    }
    let r = mlfrac::ml_eval(&p, a.z)?;
    let text = match a.format {
        None => format!("{}\n", r.value),
        Some(Format::Csv) => format!("z,value\n{},{}\n", fmt_num(a.z), fmt_num(r.value)),
        Some(Format::Json) => json_text(&json!({
            "rho": a.rho, "mu": a.mu, "gamma": a.gamma, "z": a.z,
            "value": r.value, "terms_used": r.terms_used, "precision_flag": r.precision_flag,
        })),
    };
    emit(&a.out, &text)
}

fn run_op<O: PointOp + std::fmt::Debug>(a: OpArgs<O>) -> Result<(), CliError> {
    let ord = order(a.alpha, a.b_norm)?;
    let n = points(a.grid)?;
    let (lo, hi) = a.interval;
    let f = function(&a.function, lo, hi)?;
    let cfg = verify_config()?;
    let op = a.op.clone();
    let mut g = GridFunction::sample(lo, hi, n - 1, |t| {
        match op.clone().apply(&f, &ord, t, &cfg) {
            Err(mlfrac::Error::Singularity { .. }) => Ok(f64::INFINITY),
            r => r,
        }
    })?;
    g.singular = (0..g.values.len())
        .filter(|&i| !g.values[i].is_finite())
        .collect();
    let name =
        a.op.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default();
    let text = match a.format {
        Format::Csv => grid_csv(&g),
        Format::Json => json_text(&grid_json(
            &g,
            json!({ "operator": name, "alpha": ord.alpha(), "B": ord.b_norm(), "function": f.label() }),
        )),
    };
    emit(&a.out, &text)
}

fn run_verify(a: VerifyArgs) -> Result<(), CliError> {
    let ord = order(a.alpha, a.b_norm)?;
    let mut cfg = verify_config()?;
    cfg.grid_n = points(a.grid)? - 1;
    let (lo, hi) = a.interval;
    let reports = match a.id.as_deref() {
        None => {
            if a.function.is_some() || a.second.is_some() {
                return Err(usage("--fn/--gn need --id"));
            }
            default_sweep(&cfg)?
        }
        Some(id) if a.function.is_some() => {
            let f = function(a.function.as_deref().unwrap_or_default(), lo, hi)?;
            let g = || -> Result<RealFunction, CliError> {
                let text = a
                    .second
                    .as_deref()
                    .ok_or_else(|| usage(format!("identity '{id}' needs --gn")))?;
                function(text, lo, hi)
            };
            match id {
                "ibp-integrals" => vec![verify_ibp_integrals(&f, &g()?, &ord, &cfg)],
                "ibp-derivatives" => vec![verify_ibp_derivatives(&f, &g()?, &ord, &cfg)],
                "caputo-ibp" => {
                    let g = g()?;
                    vec![
                        verify_caputo_ibp(&f, &g, &ord, Side::Left, &cfg),
                        verify_caputo_ibp(&f, &g, &ord, Side::Right, &cfg),
                    ]
                }
                "caputo-rl-relation" => {
                    vec![
                        verify_caputo_rl_relation(&f, &ord, Side::Left, &cfg),
                        verify_caputo_rl_relation(&f, &ord, Side::Right, &cfg),
                    ]
                }
                "inverse" => vec![
                    verify_inverse_and_fundamental(&f, &ord, Side::Left, &cfg),
                    verify_inverse_and_fundamental(&f, &ord, Side::Right, &cfg),
                ],
                other => return Err(usage(format!("identity '{other}' takes no functions"))),
            }
        }
        Some(id) => run_identity(id, &ord, &cfg).map_err(usage)?,
    };
    let text = match a.format {
        Format::Json if reports.len() == 1 => {
            json_text(&serde_json::to_value(&reports[0]).expect("serializable"))
        }
        Format::Json => json_text(&serde_json::to_value(&reports).expect("serializable")),
        Format::Csv => report_csv(&reports),
    };
    emit(&a.out, &text)?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: reports.len(),
        });
    }
    Ok(())
}

fn report_csv(reports: &[IdentityReport]) -> String {
    let mut out = String::from("identity,alpha,B,abs_err,tol,pass\n");
    for r in reports {
        let err = if r.abs_err.is_finite() {
            fmt_num(r.abs_err)
        } else {
            "nan".to_string()
        };
        out.push_str(&format!(
            "{},{},{},{err},{},{}\n",
            r.identity,
            fmt_num(r.alpha),
            fmt_num(r.b_norm),
            fmt_num(r.tol),
            r.pass
        ));
    }
    out
}

fn run_solve(a: SolveArgs) -> Result<(), CliError> {
    let ord = order(a.alpha, a.b_norm)?;
    let (lo, hi) = a.interval;
    if lo != 0.0 {
        return Err(usage(format!(
            "solve-el works on [0, b]; got left endpoint {lo}"
        )));
    }
    let cfg = SolverConfig {
        grid_n: points(a.grid)? - 1,
        ..SolverConfig::default()
    };
    cfg.validate().map_err(usage)?;
    let (g, extra) = match a.problem {
        Problem::FreeParticle => {
            let g = solve_free_particle(&ord, a.y0, hi, &cfg, a.amplitude)?;
            (
                g,
                json!({ "problem": "free-particle", "y0": a.y0, "amplitude": a.amplitude }),
            )
        }
        Problem::Quadratic => {
            let fp = solve_quadratic_potential(&ord, a.c, a.y0, hi, &cfg)?;
            let extra = json!({
                "problem": "quadratic",
                "y0": a.y0,
                "c": a.c,
                "iterations": fp.iterations,
                "q": fp.q,
                "contraction_estimate": fp.contraction_estimate,
                "residual": fp.residual,
            });
            (fp.y, extra)
        }
    };
    let text = match a.format {
        Format::Csv => grid_csv(&g),
        Format::Json => {
            let mut extra = extra;
            extra["alpha"] = json!(ord.alpha());
            extra["B"] = json!(ord.b_norm());
            json_text(&grid_json(&g, extra))
        }
    };
    emit(&a.out, &text)
}
