//! Classical and Mittag-Leffler-kernel fractional operators.
//!
//! All operators anchor at the endpoints of the operand's domain: left
//! operators integrate from `a`, right operators from `b`.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{
    graded_gl, rl_weighted_quad, rl_weighted_quad_right, weakly_singular_quad, QuadConfig,
    RealFunction,
};
use crate::special_fn::{gamma_fn, MlParams, MlSeries};

/// Largest order accepted by the Mittag-Leffler-kernel operators. Beyond it
/// `λ = -α/(1-α)` pushes kernel arguments out of the series' working domain.
pub const KERNEL_ALPHA_MAX: f64 = 0.99;

/// Fractional order `α ∈ (0, 1]` together with the normalization `B(α) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    alpha: f64,
    b_norm: f64,
}

impl FracOrder {
    pub fn new(alpha: f64, b_norm: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(b_norm > 0.0 && b_norm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "B(alpha) must be > 0, got {b_norm}"
            )));
        }
        Ok(Self { alpha, b_norm })
    }

    /// `B(α) = 1`.
    pub fn unit(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// Kernel rate `λ = -α/(1-α)`.
    pub fn lambda(&self) -> f64 {
        -self.alpha / (1.0 - self.alpha)
    }

    /// `B(α)/(1-α)`, the prefactor of both derivatives.
    pub fn scale(&self) -> f64 {
        self.b_norm / (1.0 - self.alpha)
    }

    pub fn check_kernel(&self) -> Result<()> {
        if self.alpha > KERNEL_ALPHA_MAX {
            return Err(Error::DegenerateOrder { alpha: self.alpha });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// The endpoint the operator integrates from.
    pub fn anchor(self, f: &RealFunction) -> f64 {
        match self {
            Side::Left => f.a(),
            Side::Right => f.b(),
        }
    }

    /// Distance from the anchor to `t`.
    pub fn distance(self, f: &RealFunction, t: f64) -> f64 {
        match self {
            Side::Left => t - f.a(),
            Side::Right => f.b() - t,
        }
    }
}

/// `d ↦ E^γ_{ρ,μ}(ω d^ρ)` with cached series coefficients.
#[derive(Debug, Clone)]
pub struct MlKernel {
    series: MlSeries,
    omega: f64,
}

impl MlKernel {
    /// Kernel for distances up to `len`.
    pub fn new(p: MlParams, omega: f64, len: f64) -> Result<Self> {
        let z_max = omega.abs() * len.max(0.0).powf(p.rho);
        Ok(Self {
            series: MlSeries::new(p, z_max)?,
            omega,
        })
    }

    /// The derivative kernel `E_α(λ d^α)`.
    pub fn for_order(ord: &FracOrder, len: f64) -> Result<Self> {
        ord.check_kernel()?;
        Self::new(MlParams::one_param(ord.alpha)?, ord.lambda(), len)
    }

    #[inline]
    pub fn eval(&self, d: f64) -> Result<f64> {
        if self.omega == 0.0 {
            return self.series.eval(0.0);
        }
        self.series
            .eval(self.omega * d.powf(self.series.params().rho))
    }
}

/// Runs a quadrature whose integrand can fail. Failures become NaN samples
/// inside the integrand; the first recorded error replaces the
/// NonFiniteIntegrand it provokes.
fn with_fallible<T>(body: impl FnOnce(&dyn Fn(Result<f64>) -> f64) -> Result<T>) -> Result<T> {
    let slot: RefCell<Option<Error>> = RefCell::new(None);
    let ok = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            slot.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let out = body(&ok);
    match slot.into_inner() {
        Some(e) => Err(e),
        None => out,
    }
}

/// Classical Riemann-Liouville integral of order `alpha`.
pub fn rl_integral(
    side: Side,
    f: &RealFunction,
    alpha: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    match side {
        Side::Left => rl_weighted_quad(f, alpha, f.a(), t, cfg),
        Side::Right => rl_weighted_quad_right(f, alpha, t, f.b(), cfg),
    }
}

/// AB integral `((1-α)/B) f(t) + (α/B) I^α f(t)`.
pub fn ab_integral(
    side: Side,
    f: &RealFunction,
    ord: &FracOrder,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    f.check_domain(t)?;
    let (al, b) = (ord.alpha(), ord.b_norm());
    let rl = rl_integral(side, f, al, t, cfg)?;
    Ok((1.0 - al) / b * f.eval(t) + al / b * rl)
}

/// ABC derivative: `(B/(1-α)) ∫_a^t f'(x) E_α(λ(t-x)^α) dx` on the left,
/// `-(B/(1-α)) ∫_t^b f'(x) E_α(λ(x-t)^α) dx` on the right.
pub fn abc_derivative(
    side: Side,
    f: &RealFunction,
    ord: &FracOrder,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    ord.check_kernel()?;
    f.check_domain(t)?;
    let len = side.distance(f, t);
    if len <= 0.0 {
        return Ok(0.0);
    }
    let kernel = MlKernel::for_order(ord, len)?;
    let integral = with_fallible(|ok| match side {
        Side::Left => graded_gl(
            |x, _, d| ok(f.derivative_at(x)) * ok(kernel.eval(d)),
            f.a(),
            t,
            cfg,
        ),
        Side::Right => graded_gl(
            |x, d, _| ok(f.derivative_at(x)) * ok(kernel.eval(d)),
            t,
            f.b(),
            cfg,
        ),
    })?;
    Ok(match side {
        Side::Left => ord.scale() * integral,
        Side::Right => -ord.scale() * integral,
    })
}

/// ABR derivative from values of `f` alone. Differentiating the kernel
/// integral under the sign gives
/// `(B/(1-α)) [f(t) + λ ∫_0^dist d^{α-1} E_{α,α}(λ d^α) f(t ∓ d) dd]`,
/// which stays accurate when `f'` is singular at the anchor.
pub fn abr_derivative(
    side: Side,
    f: &RealFunction,
    ord: &FracOrder,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    ord.check_kernel()?;
    f.check_domain(t)?;
    let ft = f.eval(t);
    let len = side.distance(f, t).max(0.0);
    let lambda = ord.lambda();
    if len == 0.0 || lambda == 0.0 {
        return Ok(ord.scale() * ft);
    }
    let al = ord.alpha();
    let kernel = MlKernel::new(MlParams::two_param(al, al)?, lambda, len)?;
    let point = |d: f64| match side {
        Side::Left => (t - d).max(f.a()),
        Side::Right => (t + d).min(f.b()),
    };
    let tail = with_fallible(|ok| {
        weakly_singular_quad(|d| ok(kernel.eval(d)) * f.eval(point(d)), al, len, cfg)
    })?;
    Ok(ord.scale() * (ft + lambda * tail))
}

/// `(B/(1-α)) f(anchor) E_α(λ dist^α)`, the gap between the ABR and ABC
/// derivatives.
pub fn abr_boundary_term(side: Side, f: &RealFunction, ord: &FracOrder, t: f64) -> Result<f64> {
    ord.check_kernel()?;
    f.check_domain(t)?;
    let fa = f.eval(side.anchor(f));
    if !fa.is_finite() {
        return Err(Error::Singularity { t: side.anchor(f) });
    }
    let d = side.distance(f, t).max(0.0);
    let kernel = MlKernel::for_order(ord, d)?;
    Ok(ord.scale() * fa * kernel.eval(d)?)
}

/// Classical Riemann-Liouville derivative of order `alpha ∈ (0, 1)` for
/// differentiable `f`: `f(a)(t-a)^{-α}/Γ(1-α) + I_a^{1-α} f'` on the left and
/// `f(b)(b-t)^{-α}/Γ(1-α) - I_b^{1-α} f'` on the right.
pub fn rl_derivative(
    side: Side,
    f: &RealFunction,
    alpha: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    f.check_domain(t)?;
    let anchor_val = f.eval(side.anchor(f));
    let d = side.distance(f, t);
    let boundary = if anchor_val == 0.0 {
        0.0
    } else if d <= 0.0 {
        return Err(Error::Singularity { t });
    } else {
        anchor_val * d.powf(-alpha) / gamma_fn(1.0 - alpha)?
    };
    let df = f.derivative();
    let tail = rl_integral(side, &df, 1.0 - alpha, t, cfg)?;
    Ok(match side {
        Side::Left => boundary + tail,
        Side::Right => boundary - tail,
    })
}

/// `(Qf)(t) = f(a + b - t)`.
pub fn q_reflect(f: &RealFunction) -> RealFunction {
    f.reflect()
}

/// Generalized ML integral operator: `∫ d^{μ-1} E^γ_{ρ,μ}(ω d^ρ) f(s) ds`
/// with `d = x - s` over `[a, x]` (left) or `d = s - x` over `[x, b]` (right).
pub fn gen_ml_integral(
    side: Side,
    p: &MlParams,
    omega: f64,
    f: &RealFunction,
    x: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    f.check_domain(x)?;
    let len = side.distance(f, x);
    if len <= 0.0 {
        return Ok(0.0);
    }
    let kernel = MlKernel::new(*p, omega, len)?;
    let point = move |d: f64| match side {
        Side::Left => x - d,
        Side::Right => x + d,
    };
    with_fallible(|ok| {
        if p.mu < 1.0 {
            weakly_singular_quad(|d| ok(kernel.eval(d)) * f.eval(point(d)), p.mu, len, cfg)
        } else {
            let m1 = p.mu - 1.0;
            graded_gl(
                |_, d, far| {
                    ok(kernel.eval(d)) * d.powf(m1) * f.eval(anchor_side(side, f, far, point(d)))
                },
                0.0,
                len,
                cfg,
            )
        }
    })
}

/// Evaluates `f` at the point that lies `far` from the anchor, which is more
/// accurate than `point` when `far` is tiny.
#[inline]
fn anchor_side(side: Side, f: &RealFunction, far: f64, point: f64) -> f64 {
    if far < 1e-3 * (f.b() - f.a()) {
        match side {
            Side::Left => f.a() + far,
            Side::Right => f.b() - far,
        }
    } else {
        point
    }
}

/// The operator families exposed by the command line and the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    RlIntegral,
    AbIntegral,
    Abc,
    Abr,
    RlDerivative,
}

impl OpKind {
    pub fn apply(
        self,
        side: Side,
        f: &RealFunction,
        ord: &FracOrder,
        t: f64,
        cfg: &QuadConfig,
    ) -> Result<f64> {
        match self {
            OpKind::RlIntegral => rl_integral(side, f, ord.alpha(), t, cfg),
            OpKind::AbIntegral => ab_integral(side, f, ord, t, cfg),
            OpKind::Abc => abc_derivative(side, f, ord, t, cfg),
            OpKind::Abr => abr_derivative(side, f, ord, t, cfg),
            OpKind::RlDerivative => rl_derivative(side, f, ord.alpha(), t, cfg),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::RlIntegral => "rl",
            OpKind::AbIntegral => "ab",
            OpKind::Abc => "abc",
            OpKind::Abr => "abr",
            OpKind::RlDerivative => "rl-deriv",
        }
    }
}

/// Uniform-grid samples `values[i] = g(a + i (b-a)/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
    /// Indices whose value is a stand-in for a singularity.
    pub singular: Vec<usize>,
}

impl GridFunction {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!(
                "invalid interval [{a}, {b}]"
            )));
        }
        if values.len() < 3 {
            return Err(Error::InvalidParameter("a grid needs n >= 2 cells".into()));
        }
        Ok(Self {
            a,
            b,
            values,
            singular: Vec::new(),
        })
    }

    /// Node coordinates for `n` cells on `[a, b]`; the last node is exactly `b`.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|i| {
                if i == n {
                    b
                } else {
                    a + (b - a) * (i as f64 / n as f64)
                }
            })
            .collect()
    }

    /// Samples `g` at every node, in parallel.
    pub fn sample<G>(a: f64, b: f64, n: usize, g: G) -> Result<Self>
    where
        G: Fn(f64) -> Result<f64> + Sync + Send,
    {
        if n < 2 {
            return Err(Error::InvalidParameter("a grid needs n >= 2 cells".into()));
        }
        let values = Self::nodes(a, b, n)
            .into_par_iter()
            .map(g)
            .collect::<Result<Vec<_>>>()?;
        Self::new(a, b, values)
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n() as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i == self.n() {
            self.b
        } else {
            self.a + (self.b - self.a) * (i as f64 / self.n() as f64)
        }
    }

    pub fn ts(&self) -> Vec<f64> {
        Self::nodes(self.a, self.b, self.n())
    }

    /// Piecewise-linear interpolant; constant extension outside `[a, b]`.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.n();
        let s = ((t - self.a) / self.h()).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }

    pub fn to_function(&self) -> RealFunction {
        let g = self.clone();
        RealFunction::new(self.a, self.b, move |t| g.interpolate(t))
            .expect("grid interval is valid")
            .labeled("grid")
    }

    /// Largest |value| over nodes not flagged singular.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.singular.contains(i))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, g: impl Fn(f64, f64) -> f64) -> GridFunction {
        let values = self
            .ts()
            .into_iter()
            .zip(&self.values)
            .map(|(t, &v)| g(t, v))
            .collect();
        GridFunction {
            values,
            ..self.clone()
        }
    }
}

/// Evaluates an operator at every node of an `n`-cell grid on `f`'s domain.
pub fn apply_on_grid(
    op: OpKind,
    side: Side,
    f: &RealFunction,
    ord: &FracOrder,
    n: usize,
    cfg: &QuadConfig,
) -> Result<GridFunction> {
    GridFunction::sample(f.a(), f.b(), n, |t| op.apply(side, f, ord, t, cfg))
}

/// Riemann-Liouville integral of the piecewise-linear interpolant of `g`,
/// exact at the nodes (product trapezoidal weights).
pub fn rl_integral_grid(side: Side, g: &GridFunction, alpha: f64) -> Result<GridFunction> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let n = g.n();
    let mut v = g.values.clone();
    if side == Side::Right {
        v.reverse();
    }
    // a_k = (k+1)^{α+1} - 2 k^{α+1} + (k-1)^{α+1} for interior distance k
    let p = |k: usize| (k as f64).powf(alpha + 1.0);
    let scale = g.h().powf(alpha) / gamma_fn(alpha + 2.0)?;
    let mut out: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|m| {
            if m == 0 {
                return 0.0;
            }
            let mf = m as f64;
            let mut s = (p(m - 1) - (mf - 1.0 - alpha) * mf.powf(alpha)) * v[0] + v[m];
            for j in 1..m {
                let k = m - j;
                s += (p(k + 1) - 2.0 * p(k) + p(k - 1)) * v[j];
            }
            scale * s
        })
        .collect();
    if side == Side::Right {
        out.reverse();
    }
    Ok(GridFunction {
        values: out,
        singular: Vec::new(),
        ..g.clone()
    })
}

/// AB integral of the piecewise-linear interpolant of `g` at the nodes.
pub fn ab_integral_grid(side: Side, g: &GridFunction, ord: &FracOrder) -> Result<GridFunction> {
    let (al, b) = (ord.alpha(), ord.b_norm());
    let rl = rl_integral_grid(side, g, al)?;
    let values = g
        .values
        .iter()
        .zip(&rl.values)
        .map(|(f, i)| (1.0 - al) / b * f + al / b * i)
        .collect();
    Ok(GridFunction {
        values,
        singular: Vec::new(),
        ..g.clone()
    })
}
