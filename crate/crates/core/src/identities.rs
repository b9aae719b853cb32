//! Numerical checks of the integration-by-parts, inversion, convolution and
//! eigenfunction identities, plus the closed-form special solutions.
//!
//! Each verifier evaluates the two sides through separate code paths and
//! returns an [`IdentityReport`]. Numeric failures are recorded in the report
//! (non-finite sides, `error` set, `pass = false`) instead of being raised.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{
    ab_integral, abc_derivative, abr_boundary_term, abr_derivative, gen_ml_integral, rl_integral,
    FracOrder, GridFunction, MlKernel, Side,
};
use crate::quadrature::{central_diff, fixed_gl, graded_gl, QuadConfig, RealFunction};
use crate::special_fn::{gamma_fn, ln_gamma, ml, MlParams, TERM_CAP};

/// Report tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-5;

/// A scalar or a grid of values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Scalar(f64),
    Grid(Vec<f64>),
}

impl Quantity {
    fn max_gap(&self, other: &Quantity) -> f64 {
        match (self, other) {
            (Quantity::Scalar(x), Quantity::Scalar(y)) => gap(*x, *y),
            (Quantity::Grid(x), Quantity::Grid(y)) if x.len() == y.len() => x
                .iter()
                .zip(y)
                .map(|(a, b)| gap(*a, *b))
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Quantity::Scalar(x) => Some(*x),
            Quantity::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<&[f64]> {
        match self {
            Quantity::Grid(v) => Some(v),
            Quantity::Scalar(_) => None,
        }
    }
}

fn gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// One sub-comparison of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub abs_err: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, lhs: Quantity, rhs: Quantity) -> Self {
        let abs_err = lhs.max_gap(&rhs);
        Self {
            name: name.into(),
            lhs,
            rhs,
            abs_err,
        }
    }

    fn scalar(name: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(name, Quantity::Scalar(lhs), Quantity::Scalar(rhs))
    }

    fn grid(name: &str, lhs: Vec<f64>, rhs: Vec<f64>) -> Self {
        Self::new(name, Quantity::Grid(lhs), Quantity::Grid(rhs))
    }
}

/// Outcome of one identity check. The top-level `lhs`/`rhs` are those of the
/// first check; `abs_err` is the worst gap over all checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub alpha: f64,
    #[serde(rename = "B")]
    pub b_norm: f64,
    pub interval: [f64; 2],
    pub functions: Vec<String>,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct ReportHead {
    identity: String,
    alpha: f64,
    b_norm: f64,
    interval: [f64; 2],
    functions: Vec<String>,
}

impl ReportHead {
    fn new(
        identity: &str,
        ord: &FracOrder,
        interval: (f64, f64),
        functions: &[&RealFunction],
    ) -> Self {
        Self {
            identity: identity.to_string(),
            alpha: ord.alpha(),
            b_norm: ord.b_norm(),
            interval: [interval.0, interval.1],
            functions: functions.iter().map(|f| f.label().to_string()).collect(),
        }
    }

    fn finish(self, tol: f64, outcome: Result<Vec<Check>>) -> IdentityReport {
        let (checks, error) = match outcome {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        let (lhs, rhs) = checks
            .first()
            .map(|c| (c.lhs.clone(), c.rhs.clone()))
            .unwrap_or((Quantity::Scalar(f64::NAN), Quantity::Scalar(f64::NAN)));
        let abs_err = if checks.is_empty() {
            f64::INFINITY
        } else {
            checks.iter().map(|c| c.abs_err).fold(0.0, f64::max)
        };
        IdentityReport {
            identity: self.identity,
            alpha: self.alpha,
            b_norm: self.b_norm,
            interval: self.interval,
            functions: self.functions,
            lhs,
            rhs,
            abs_err,
            tol,
            pass: error.is_none() && abs_err <= tol,
            checks,
            error,
        }
    }
}

/// Settings shared by the verifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub tol: f64,
    /// Inner (operator-level) quadrature; outer integrals run 100x looser.
    pub quad: QuadConfig,
    /// Cells of the comparison grid for pointwise identities.
    pub grid_n: usize,
    /// Step of the independent d/dt in the Caputo/RL relation check.
    pub fd_step: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            quad: QuadConfig::default(),
            grid_n: 8,
            fd_step: 1e-4,
        }
    }
}

impl VerifyConfig {
    fn outer(&self) -> QuadConfig {
        self.quad.loosened(100.0)
    }
}

fn same_domain(f: &RealFunction, g: &RealFunction) -> Result<(f64, f64)> {
    if f.domain() != g.domain() {
        return Err(Error::InvalidParameter(
            "functions must share one interval".into(),
        ));
    }
    Ok(f.domain())
}

/// `∫_a^b u(x) dx` for an integrand that is itself an operator evaluation.
fn outer_integral(
    u: impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    cfg: &VerifyConfig,
) -> Result<f64> {
    let failure = std::sync::Mutex::new(None);
    let r = graded_gl(
        |x, _, _| match u(x) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        &cfg.outer(),
    );
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => r,
    }
}

/// `∫ φ (AB_a I ψ) = ∫ ψ (AB I_b φ)` and the mirrored
/// `∫ φ (AB I_b ψ) = ∫ ψ (AB_a I φ)`.
pub fn verify_ibp_integrals(
    phi: &RealFunction,
    psi: &RealFunction,
    ord: &FracOrder,
    cfg: &VerifyConfig,
) -> IdentityReport {
    let head = ReportHead::new("ibp-integrals", ord, phi.domain(), &[phi, psi]);
    let outcome = (|| {
        let (a, b) = same_domain(phi, psi)?;
        let q = &cfg.quad;
        let side_pair = |s: Side| -> Result<(f64, f64)> {
            let lhs = outer_integral(
                |x| Ok(phi.eval(x) * ab_integral(s, psi, ord, x, q)?),
                a,
                b,
                cfg,
            )?;
            let rhs = outer_integral(
                |x| Ok(psi.eval(x) * ab_integral(s.opposite(), phi, ord, x, q)?),
                a,
                b,
                cfg,
            )?;
            Ok((lhs, rhs))
        };
        let (l1, r1) = side_pair(Side::Left)?;
        let (l2, r2) = side_pair(Side::Right)?;
        Ok(vec![
            Check::scalar("phi*AB_aI(psi) vs psi*AB_I_b(phi)", l1, r1),
            Check::scalar("phi*AB_I_b(psi) vs psi*AB_aI(phi)", l2, r2),
        ])
    })();
    head.finish(cfg.tol, outcome)
}

/// `∫ f (ABR_a D g) = ∫ (ABR D_b f) g`.
pub fn verify_ibp_derivatives(
    f: &RealFunction,
    g: &RealFunction,
    ord: &FracOrder,
    cfg: &VerifyConfig,
) -> IdentityReport {
    let head = ReportHead::new("ibp-derivatives", ord, f.domain(), &[f, g]);
    let outcome = (|| {
        let (a, b) = same_domain(f, g)?;
        let q = &cfg.quad;
        let lhs = outer_integral(
            |x| Ok(f.eval(x) * abr_derivative(Side::Left, g, ord, x, q)?),
            a,
            b,
            cfg,
        )?;
        let rhs = outer_integral(
            |x| Ok(abr_derivative(Side::Right, f, ord, x, q)? * g.eval(x)),
            a,
            b,
            cfg,
        )?;
        Ok(vec![Check::scalar("f*ABR_aD(g) vs ABR_D_b(f)*g", lhs, rhs)])
    })();
    head.finish(cfg.tol, outcome)
}

/// Caputo integration by parts with the generalized ML boundary term.
///
/// Left: `∫ (ABC_a D f) g = ∫ f (ABR D_b g) + (B/(1-α)) [f · E_{b-} g]_a^b`.
/// Right: `∫ (ABC D_b f) g = ∫ f (ABR_a D g) - (B/(1-α)) [f · E_{a+} g]_a^b`,
/// where `E_{b-}`, `E_{a+}` are the operators with `γ = μ = 1`, `ρ = α`,
/// `ω = λ`. Stated for `a = 0`; all operators are translation covariant so
/// any `a` is accepted.
pub fn verify_caputo_ibp(
    f: &RealFunction,
    g: &RealFunction,
    ord: &FracOrder,
    side: Side,
    cfg: &VerifyConfig,
) -> IdentityReport {
    let name = match side {
        Side::Left => "caputo-ibp-left",
        Side::Right => "caputo-ibp-right",
    };
    let head = ReportHead::new(name, ord, f.domain(), &[f, g]);
    let outcome = (|| {
        let (a, b) = same_domain(f, g)?;
        let q = &cfg.quad;
        let p = MlParams::one_param(ord.alpha())?;
        let lhs = outer_integral(
            |x| Ok(abc_derivative(side, f, ord, x, q)? * g.eval(x)),
            a,
            b,
            cfg,
        )?;
        let bulk = outer_integral(
            |x| Ok(f.eval(x) * abr_derivative(side.opposite(), g, ord, x, q)?),
            a,
            b,
            cfg,
        )?;
        let e_op = |x| gen_ml_integral(side.opposite(), &p, ord.lambda(), g, x, q);
        let bracket = f.eval(b) * e_op(b)? - f.eval(a) * e_op(a)?;
        let boundary = match side {
            Side::Left => ord.scale() * bracket,
            Side::Right => -ord.scale() * bracket,
        };
        Ok(vec![Check::scalar(
            "ABC-D(f)*g vs f*ABR-D(g) + boundary",
            lhs,
            bulk + boundary,
        )])
    })();
    head.finish(cfg.tol, outcome)
}

/// `t ↦ ∫ f(x) E_α(λ|t-x|^α) dx` over the left or right range, by a fixed
/// graded Gauss rule so the result is smooth in `t`.
fn kernel_integral(f: &RealFunction, side: Side, kernel: &MlKernel, t: f64) -> Result<f64> {
    let len = side.distance(f, t);
    if len <= 0.0 {
        return Ok(0.0);
    }
    let failure = std::cell::RefCell::new(None);
    let val = fixed_gl(
        |w| {
            // x = anchor ± len ψ(w); the kernel distance len ψ(1-w) stays smooth in t
            let near = len * smoothstep(w);
            let d = len * smoothstep(1.0 - w);
            let x = match side {
                Side::Left => f.a() + near,
                Side::Right => f.b() - near,
            };
            let k = kernel.eval(d).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            });
            f.eval(x) * k * len * smoothstep_deriv(w)
        },
        0.0,
        1.0,
        16,
        20,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => val,
    }
}

fn smoothstep(w: f64) -> f64 {
    let w2 = w * w;
    w2 * w2 * (35.0 + w * (-84.0 + w * (70.0 - 20.0 * w)))
}

fn smoothstep_deriv(w: f64) -> f64 {
    let v = w * (1.0 - w);
    140.0 * v * v * v
}

/// ABR derivative by central differences of the kernel integral, independent
/// of [`abr_derivative`].
pub fn abr_by_differences(
    side: Side,
    f: &RealFunction,
    ord: &FracOrder,
    t: f64,
    h: f64,
) -> Result<f64> {
    ord.check_kernel()?;
    let (a, b) = f.domain();
    if t - h < a || t + h > b {
        return Err(Error::Domain(format!(
            "t = {t} is within h = {h} of an endpoint"
        )));
    }
    let kernel = MlKernel::for_order(ord, b - a)?;
    let k_plus = kernel_integral(f, side, &kernel, t + h)?;
    let k_minus = kernel_integral(f, side, &kernel, t - h)?;
    let dk = (k_plus - k_minus) / (2.0 * h);
    Ok(match side {
        Side::Left => ord.scale() * dk,
        Side::Right => -ord.scale() * dk,
    })
}

fn interior_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let nodes = GridFunction::nodes(a, b, n);
    nodes[1..n].to_vec()
}

/// ABC vs ABR minus the boundary term, on the interior grid nodes, with the
/// ABR side from [`abr_by_differences`] at step `h`.
pub fn caputo_rl_gap(
    f: &RealFunction,
    ord: &FracOrder,
    side: Side,
    h: f64,
    cfg: &VerifyConfig,
) -> Result<Check> {
    let (a, b) = f.domain();
    let ts = interior_nodes(a, b, cfg.grid_n.max(2));
    let pairs = ts
        .par_iter()
        .map(|&t| {
            let caputo = abc_derivative(side, f, ord, t, &cfg.quad)?;
            let abr = abr_by_differences(side, f, ord, t, h)?;
            Ok((caputo, abr - abr_boundary_term(side, f, ord, t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (lhs, rhs) = pairs.into_iter().unzip();
    Ok(Check::grid("ABC-D(f) vs ABR-D(f) - boundary", lhs, rhs))
}

/// Caputo/RL relation `ABC D f = ABR D f - (B/(1-α)) f(anchor) E_α(λ dist^α)`.
pub fn verify_caputo_rl_relation(
    f: &RealFunction,
    ord: &FracOrder,
    side: Side,
    cfg: &VerifyConfig,
) -> IdentityReport {
    let name = match side {
        Side::Left => "caputo-rl-relation-left",
        Side::Right => "caputo-rl-relation-right",
    };
    let head = ReportHead::new(name, ord, f.domain(), &[f]);
    let outcome = caputo_rl_gap(f, ord, side, cfg.fd_step, cfg).map(|c| vec![c]);
    head.finish(cfg.tol, outcome)
}

/// The AB integral of `f` as a function, carrying the derivative
/// `((1-α)/B) f' + (α/B) (±f(anchor) dist^{α-1}/Γ(α) + I^α f')`.
pub fn ab_integral_function(
    side: Side,
    f: &RealFunction,
    ord: &FracOrder,
    q: &QuadConfig,
) -> Result<RealFunction> {
    let (al, bn) = (ord.alpha(), ord.b_norm());
    let g_al = gamma_fn(al)?;
    let df = f.derivative();
    let (f1, f2, q1, q2, o1, o2) = (f.clone(), f.clone(), *q, *q, *ord, *ord);
    let fa = f.eval(side.anchor(f));
    RealFunction::with_derivative(
        f.a(),
        f.b(),
        move |t| ab_integral(side, &f1, &o1, t, &q1).unwrap_or(f64::NAN),
        move |t| {
            let d = side.distance(&f2, t);
            let jump = if fa == 0.0 {
                0.0
            } else {
                fa * d.powf(al - 1.0) / g_al
            };
            let tail = rl_integral(side, &df, o2.alpha(), t, &q2).unwrap_or(f64::NAN);
            let d_rl = match side {
                Side::Left => jump + tail,
                Side::Right => -jump + tail,
            };
            (1.0 - al) / bn * df.eval(t) + al / bn * d_rl
        },
    )
    .map(|g| g.labeled(format!("AB-I[{}]", f.label())))
}

/// An operator image `t ↦ op(f)(t)` as a function (no derivative).
fn operator_function(
    f: &RealFunction,
    label: &str,
    op: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
) -> Result<RealFunction> {
    RealFunction::new(f.a(), f.b(), move |t| op(t).unwrap_or(f64::NAN))
        .map(|g| g.labeled(format!("{label}[{}]", f.label())))
}

/// Inverse and fundamental-theorem compositions on a grid:
/// (i) `ABR-D(AB-I f) = f`, (ii) `AB-I(ABR-D f) = f`,
/// (iii) `AB-I(ABC-D f) = f - f(anchor)`.
pub fn verify_inverse_and_fundamental(
    f: &RealFunction,
    ord: &FracOrder,
    side: Side,
    cfg: &VerifyConfig,
) -> IdentityReport {
    let name = match side {
        Side::Left => "inverse-left",
        Side::Right => "inverse-right",
    };
    let head = ReportHead::new(name, ord, f.domain(), &[f]);
    let outcome = (|| {
        ord.check_kernel()?;
        let (a, b) = f.domain();
        let q = cfg.quad;
        let outer = cfg.outer();
        let ts = GridFunction::nodes(a, b, cfg.grid_n.max(2));
        let fa = f.eval(side.anchor(f));

        let ab_f = ab_integral_function(side, f, ord, &q)?;
        let (f1, o1) = (f.clone(), *ord);
        let abr_f = operator_function(f, "ABR-D", move |t| abr_derivative(side, &f1, &o1, t, &q))?;
        let (f2, o2) = (f.clone(), *ord);
        let abc_f = operator_function(f, "ABC-D", move |t| abc_derivative(side, &f2, &o2, t, &q))?;

        let rows = ts
            .par_iter()
            .map(|&t| {
                let i = abr_derivative(side, &ab_f, ord, t, &outer)?;
                let ii = ab_integral(side, &abr_f, ord, t, &outer)?;
                let iii = ab_integral(side, &abc_f, ord, t, &outer)?;
                Ok([i, ii, iii, f.eval(t)])
            })
            .collect::<Result<Vec<_>>>()?;
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
        let fv = col(3);
        Ok(vec![
            Check::grid(
                "AB-I(ABC-D f) vs f - f(anchor)",
                col(2),
                fv.iter().map(|v| v - fa).collect(),
            ),
            Check::grid("ABR-D(AB-I f) vs f", col(0), fv.clone()),
            Check::grid("AB-I(ABR-D f) vs f", col(1), fv),
        ])
    })();
    head.finish(cfg.tol, outcome)
}

/// `x^{ν-1} E^σ_{α,ν}(λ x^α)`.
pub fn eigen_value(sigma: f64, nu: f64, alpha: f64, lambda: f64, x: f64) -> Result<f64> {
    Ok(x.powf(nu - 1.0) * ml(alpha, nu, sigma, lambda * x.powf(alpha))?)
}

/// `d/dx [x^{ν-1} E^σ_{α,ν}(λ x^α)]`, summed term by term:
/// `Σ (σ)_k λ^k (αk+ν-1) x^{αk+ν-2} / (Γ(αk+ν) k!)`.
pub fn eigen_derivative(sigma: f64, nu: f64, alpha: f64, lambda: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be > 0")));
    }
    let z = lambda * x.powf(alpha);
    let peak = z.abs().powf(1.0 / alpha);
    let mut ratio = 1.0; // (σ)_k / k!
    let mut zk = 1.0;
    let mut sum = 0.0;
    let mut small = 0;
    for k in 0..TERM_CAP {
        let kf = k as f64;
        let arg = alpha * kf + nu;
        let term = ratio * zk * (arg - 1.0) * (-ln_gamma(arg)).exp();
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && arg > peak {
            small += 1;
            if small >= 2 {
                return Ok(sum * x.powf(nu - 2.0));
            }
        } else {
            small = 0;
        }
        ratio *= (sigma + kf) / (kf + 1.0);
        if ratio == 0.0 {
            return Ok(sum * x.powf(nu - 2.0));
        }
        zk *= z;
    }
    Err(Error::Convergence { terms: TERM_CAP })
}

/// The Mittag-Leffler eigenfunction `x^{ν-1} E^σ_{α,ν}(λ x^α)` on `[0, b]`,
/// `λ` taken from `ord`, with its term-wise derivative.
pub fn eigenfunction(sigma: f64, nu: f64, ord: &FracOrder, b: f64) -> Result<RealFunction> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
    }
    let (al, lam) = (ord.alpha(), ord.lambda());
    RealFunction::with_derivative(
        0.0,
        b,
        move |x| eigen_value(sigma, nu, al, lam, x).unwrap_or(f64::NAN),
        move |x| eigen_derivative(sigma, nu, al, lam, x).unwrap_or(f64::NAN),
    )
    .map(|f| {
        f.labeled(format!(
            "x^{}*E^{sigma}_{{{al},{nu}}}(lambda*x^{al})",
            nu - 1.0
        ))
    })
}

/// Which derivative a closed form refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    Abr,
    Abc,
}

/// `(B/(1-α)) x^{ν-1} E^{1+σ}_{α,ν}(λ x^α)`. Both kinds share the formula.
pub fn ml_eigen_closed(
    kind: EigenKind,
    sigma: f64,
    nu: f64,
    ord: &FracOrder,
    x: f64,
) -> Result<f64> {
    let _ = kind;
    if !(nu > 0.0 && x > 0.0) {
        return Err(Error::Domain(format!(
            "need nu > 0 and x > 0, got nu = {nu}, x = {x}"
        )));
    }
    Ok(ord.scale() * eigen_value(1.0 + sigma, nu, ord.alpha(), ord.lambda(), x)?)
}

/// Numeric ABC and ABR derivatives of the eigenfunction against the closed
/// form at the given points. The ABR check also asserts the decomposition
/// ABR = ABC + boundary term, which separates the two when `f(0) ≠ 0`.
pub fn verify_eigenfunction(
    sigma: f64,
    nu: f64,
    ord: &FracOrder,
    xs: &[f64],
    cfg: &VerifyConfig,
) -> IdentityReport {
    let b = xs.iter().copied().fold(0.0, f64::max);
    let head = ReportHead {
        identity: "eigenfunction".into(),
        alpha: ord.alpha(),
        b_norm: ord.b_norm(),
        interval: [0.0, b],
        functions: vec![format!("sigma={sigma}, nu={nu}")],
    };
    let outcome = (|| {
        let f = eigenfunction(sigma, nu, ord, b)?;
        let rows = xs
            .par_iter()
            .map(|&x| {
                let closed = ml_eigen_closed(EigenKind::Abc, sigma, nu, ord, x)?;
                let abc = abc_derivative(Side::Left, &f, ord, x, &cfg.quad)?;
                let abr = abr_derivative(Side::Left, &f, ord, x, &cfg.quad)?;
                Ok([abc, abr, closed])
            })
            .collect::<Result<Vec<_>>>()?;
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
        Ok(vec![
            Check::grid("ABC-D(eigen) vs closed form", col(0), col(2)),
            Check::grid("ABR-D(eigen) vs closed form", col(1), col(2)),
        ])
    })();
    head.finish(cfg.tol, outcome)
}

/// Kernel convolution `∫_0^x E_α(λ(x-t)^α) t^{ν-1} E^σ_{α,ν}(λ t^α) dt
/// = x^ν E^{1+σ}_{α,1+ν}(λ x^α)`.
pub fn verify_convolution(
    sigma: f64,
    nu: f64,
    alpha: f64,
    lambda: f64,
    x: f64,
    cfg: &VerifyConfig,
) -> IdentityReport {
    let head = ReportHead {
        identity: "convolution".into(),
        alpha,
        b_norm: 1.0,
        interval: [0.0, x],
        functions: vec![format!("sigma={sigma}, nu={nu}, lambda={lambda}")],
    };
    let outcome = (|| {
        if !(nu > 0.0 && x > 0.0 && alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(
                "need nu > 0, x > 0 and alpha in (0, 1)".into(),
            ));
        }
        let f = RealFunction::new(0.0, x, move |t| {
            eigen_value(sigma, nu, alpha, lambda, t).unwrap_or(f64::NAN)
        })?;
        let p = MlParams::one_param(alpha)?;
        let lhs = gen_ml_integral(Side::Left, &p, lambda, &f, x, &cfg.quad)?;
        let rhs = x.powf(nu) * ml(alpha, 1.0 + nu, 1.0 + sigma, lambda * x.powf(alpha))?;
        Ok(vec![Check::scalar(
            "E-kernel convolution vs closed form",
            lhs,
            rhs,
        )])
    })();
    head.finish(cfg.tol, outcome)
}

/// `d/dz [z^{μ-1} E^γ_{α,μ}(λ z^α)] = z^{μ-2} E^γ_{α,μ-1}(λ z^α)` for `μ > 1`,
/// the left side by central differences.
pub fn verify_diff_formula(
    gamma_p: f64,
    mu: f64,
    alpha: f64,
    lambda: f64,
    z: f64,
    cfg: &VerifyConfig,
) -> IdentityReport {
    let head = ReportHead {
        identity: "diff-formula".into(),
        alpha,
        b_norm: 1.0,
        interval: [0.0, z],
        functions: vec![format!("gamma={gamma_p}, mu={mu}, lambda={lambda}")],
    };
    let outcome = (|| {
        if !(mu > 1.0 && z > 0.0) {
            return Err(Error::InvalidParameter("need mu > 1 and z > 0".into()));
        }
        let p = MlParams::new(alpha, mu, gamma_p)?;
        let lo = 0.5 * z;
        let f = RealFunction::new(lo, 2.0 * z, move |s| {
            s.powf(mu - 1.0)
                * crate::special_fn::ml_eval(&p, lambda * s.powf(alpha))
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
        })?;
        let lhs = central_diff(&f, z)?;
        let rhs = z.powf(mu - 2.0) * ml(alpha, mu - 1.0, gamma_p, lambda * z.powf(alpha))?;
        Ok(vec![Check::scalar(
            "d/dz by differences vs closed form",
            lhs,
            rhs,
        )])
    })();
    head.finish(cfg.tol, outcome)
}

/// `α x^{α-1} / (B Γ(α))`, the singular mode annihilated by the derivatives.
pub fn zero_mode(ord: &FracOrder, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be > 0")));
    }
    let al = ord.alpha();
    Ok(al * x.powf(al - 1.0) / (ord.b_norm() * gamma_fn(al)?))
}

/// The scaled truncated eigenfunction `((1-α)/B) x^{ν-1} E^{-1}_{α,ν}(λ x^α)`,
/// which tends to [`zero_mode`] as `ν → 0⁺`.
pub fn truncated_eigenfunction(nu: f64, ord: &FracOrder, b: f64) -> Result<RealFunction> {
    let base = eigenfunction(-1.0, nu, ord, b)?;
    let c = (1.0 - ord.alpha()) / ord.b_norm();
    let (f, df) = (
        base.eval_fn(),
        base.analytic_derivative()
            .expect("eigenfunction carries a derivative"),
    );
    RealFunction::with_derivative(0.0, b, move |x| c * f(x), move |x| c * df(x))
        .map(|g| g.labeled(format!("truncated eigenfunction nu={nu}")))
}

/// The polynomial `c0 + c1 x + c2 x² + ...` on `[a, b]` with its exact
/// derivative.
pub fn polynomial(coeffs: &[f64], a: f64, b: f64) -> Result<RealFunction> {
    let c = coeffs.to_vec();
    let d = coeffs.to_vec();
    let label = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| match k {
            0 => format!("{c}"),
            1 => format!("{c}*x"),
            _ => format!("{c}*x^{k}"),
        })
        .collect::<Vec<_>>()
        .join(" + ");
    RealFunction::with_derivative(
        a,
        b,
        move |x| c.iter().rev().fold(0.0, |acc, ck| acc * x + ck),
        move |x| {
            d.iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, ck)| acc * x + k as f64 * ck)
        },
    )
    .map(|f| {
        f.labeled(if label.is_empty() {
            "0".to_string()
        } else {
            label
        })
    })
}

/// `AB_0 I^{1/2}` of `x` on `[0, 1]` with `B = 1`: `x/2 + 2x^{3/2}/(3√π)`.
pub fn ibp_example_g() -> RealFunction {
    RealFunction::with_derivative(
        0.0,
        1.0,
        |x: f64| x / 2.0 + 2.0 * x.powf(1.5) / (3.0 * PI.sqrt()),
        |x: f64| 0.5 + x.sqrt() / PI.sqrt(),
    )
    .expect("valid interval")
    .labeled("x/2 + 2x^(3/2)/(3 sqrt(pi))")
}

/// `AB I_1^{1/2}` of `1 - x` on `[0, 1]` with `B = 1`.
pub fn ibp_example_f() -> RealFunction {
    RealFunction::with_derivative(
        0.0,
        1.0,
        |x: f64| (1.0 - x) / 2.0 + 2.0 * (1.0 - x).powf(1.5) / (3.0 * PI.sqrt()),
        |x: f64| -0.5 - (1.0 - x).sqrt() / PI.sqrt(),
    )
    .expect("valid interval")
    .labeled("(1-x)/2 + 2(1-x)^(3/2)/(3 sqrt(pi))")
}

/// `1/12 + 8/(105√π)`, the common value of both by-parts examples.
pub fn ibp_example_value() -> f64 {
    1.0 / 12.0 + 8.0 / (105.0 * PI.sqrt())
}

/// Identity selectors understood by [`run_identity`].
pub const IDENTITY_IDS: &[&str] = &[
    "ibp-integrals",
    "ibp-derivatives",
    "caputo-ibp",
    "caputo-rl-relation",
    "inverse",
    "convolution",
    "diff-formula",
    "eigenfunction",
];

/// The canonical instance of one identity at order `ord` on `[0, 1]`.
pub fn run_identity(id: &str, ord: &FracOrder, cfg: &VerifyConfig) -> Result<Vec<IdentityReport>> {
    let poly = |c: &[f64]| polynomial(c, 0.0, 1.0);
    let al = ord.alpha();
    Ok(match id {
        "ibp-integrals" => vec![verify_ibp_integrals(
            &poly(&[1.0, -1.0])?,
            &poly(&[0.0, 1.0])?,
            ord,
            cfg,
        )],
        "ibp-derivatives" => {
            // the example pair is AB-I of 1-x and x at this order
            let x = poly(&[0.0, 1.0])?;
            let omx = poly(&[1.0, -1.0])?;
            let f = ab_integral_function(Side::Right, &omx, ord, &cfg.quad)?;
            let g = ab_integral_function(Side::Left, &x, ord, &cfg.quad)?;
            vec![verify_ibp_derivatives(&f, &g, ord, cfg)]
        }
        "caputo-ibp" => {
            let (f, g) = (poly(&[0.0, 1.0])?, poly(&[1.0, -1.0])?);
            vec![
                verify_caputo_ibp(&f, &g, ord, Side::Left, cfg),
                verify_caputo_ibp(&f, &g, ord, Side::Right, cfg),
            ]
        }
        "caputo-rl-relation" => {
            let f = poly(&[1.0, 1.0, 0.0, -1.0])?;
            vec![
                verify_caputo_rl_relation(&f, ord, Side::Left, cfg),
                verify_caputo_rl_relation(&f, ord, Side::Right, cfg),
            ]
        }
        "inverse" => {
            let f = poly(&[0.5, 1.0, -1.0])?;
            vec![
                verify_inverse_and_fundamental(&f, ord, Side::Left, cfg),
                verify_inverse_and_fundamental(&f, ord, Side::Right, cfg),
            ]
        }
        "convolution" => vec![verify_convolution(1.0, 1.5, al, ord.lambda(), 1.0, cfg)],
        "diff-formula" => vec![verify_diff_formula(2.0, 2.5, al, -1.0, 1.0, cfg)],
        "eigenfunction" => vec![verify_eigenfunction(
            1.0,
            1.5,
            ord,
            &[0.2, 0.4, 0.6, 0.8, 1.0],
            cfg,
        )],
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown identity '{other}'; expected one of {}",
                IDENTITY_IDS.join(", ")
            )))
        }
    })
}

/// The full suite: α ∈ {0.25, 0.5, 0.75}, `[0, 1]`, `B = 1`, polynomial test
/// functions up to degree 3.
pub fn default_sweep(cfg: &VerifyConfig) -> Result<Vec<IdentityReport>> {
    let poly = |c: &[f64]| polynomial(c, 0.0, 1.0);
    let pairs = [
        (poly(&[1.0, -1.0])?, poly(&[0.0, 1.0])?),
        (poly(&[0.0, 1.0])?, poly(&[0.0, 0.0, 1.0])?),
        (poly(&[0.5, 0.0, -2.0, 1.0])?, poly(&[1.0, 1.0, 0.0, -0.5])?),
    ];
    let singles = [
        poly(&[0.0, 1.0])?,
        poly(&[1.0, 0.0, 1.0])?,
        poly(&[0.2, -1.0, 0.0, 1.5])?,
    ];

    type Job = Box<dyn Fn() -> Vec<IdentityReport> + Send + Sync>;
    let mut jobs: Vec<Job> = Vec::new();
    for al in [0.25, 0.5, 0.75] {
        let ord = FracOrder::unit(al)?;
        let c = *cfg;
        for (f, g) in pairs.clone() {
            let (f2, g2) = (f.clone(), g.clone());
            jobs.push(Box::new(move || {
                vec![verify_ibp_integrals(&f, &g, &ord, &c)]
            }));
            jobs.push(Box::new(move || {
                vec![
                    verify_ibp_derivatives(&f2, &g2, &ord, &c),
                    verify_caputo_ibp(&f2, &g2, &ord, Side::Left, &c),
                    verify_caputo_ibp(&f2, &g2, &ord, Side::Right, &c),
                ]
            }));
        }
        for f in singles.clone() {
            let f2 = f.clone();
            jobs.push(Box::new(move || {
                vec![
                    verify_caputo_rl_relation(&f, &ord, Side::Left, &c),
                    verify_caputo_rl_relation(&f, &ord, Side::Right, &c),
                ]
            }));
            jobs.push(Box::new(move || {
                vec![
                    verify_inverse_and_fundamental(&f2, &ord, Side::Left, &c),
                    verify_inverse_and_fundamental(&f2, &ord, Side::Right, &c),
                ]
            }));
        }
        jobs.push(Box::new(move || {
            let mut out = Vec::new();
            for sigma in [0.0, 1.0] {
                for nu in [0.5, 1.0, 1.5] {
                    out.push(verify_convolution(sigma, nu, al, ord.lambda(), 1.0, &c));
                }
            }
            out.push(verify_diff_formula(1.0, 2.0, al, -1.0, 0.7, &c));
            out.push(verify_diff_formula(2.0, 2.5, al, -1.0, 1.0, &c));
            out.push(verify_eigenfunction(1.0, 1.5, &ord, &[0.2, 0.6, 1.0], &c));
            out
        }));
    }
    Ok(jobs.par_iter().flat_map_iter(|job| job()).collect())
}
