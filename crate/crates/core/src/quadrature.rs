//! Numerical integration and differentiation primitives.
//!
//! * [`adaptive_gl`]: globally adaptive Gauss-Legendre with bisection. The
//!   error of a panel is estimated by the difference between the order-`n`
//!   and order-`n-2` rules; the panel with the largest estimate is split
//!   until the summed estimate meets the tolerance.
//! * [`graded_gl`]: [`adaptive_gl`] after a polynomial change of variables
//!   that flattens both endpoints. Integrable algebraic endpoint
//!   singularities `(x-lo)^{s}`, `s > -3/4`, become bounded.
//! * [`rl_weighted_quad`]: the Riemann-Liouville integral. The kernel
//!   singularity is removed exactly by `u = (t-s)^α`.
//! * [`central_diff`]: second-order finite differences.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::special_fn::gamma_fn;

/// Shared scalar map `R -> R`.
pub type Fun = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function on a closed interval `[a, b]`, optionally carrying its
/// analytic first derivative.
#[derive(Clone)]
pub struct RealFunction {
    f: Fun,
    df: Option<Fun>,
    a: f64,
    b: f64,
    label: String,
}

impl fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFunction")
            .field("label", &self.label)
            .field("domain", &(self.a, self.b))
            .field("analytic_derivative", &self.df.is_some())
            .finish()
    }
}

impl RealFunction {
    pub fn new<F>(a: f64, b: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!(
                "invalid interval [{a}, {b}]"
            )));
        }
        Ok(Self {
            f: Arc::new(f),
            df: None,
            a,
            b,
            label: String::from("f"),
        })
    }

    /// Same as [`RealFunction::new`] plus an analytic derivative.
    pub fn with_derivative<F, D>(a: f64, b: f64, f: F, df: D) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut r = Self::new(a, b, f)?;
        r.df = Some(Arc::new(df));
        Ok(r)
    }

    pub fn from_parts(a: f64, b: f64, f: Fun, df: Option<Fun>) -> Result<Self> {
        let mut r = Self::new(a, b, move |x| f(x))?;
        r.df = df;
        Ok(r)
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Ok(Self::with_derivative(a, b, move |_| c, |_| 0.0)?.labeled(format!("{c}")))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn has_derivative(&self) -> bool {
        self.df.is_some()
    }

    pub fn eval_fn(&self) -> Fun {
        self.f.clone()
    }

    pub fn analytic_derivative(&self) -> Option<Fun> {
        self.df.clone()
    }

    /// Errors unless `t ∈ [a, b]` (up to a few ulps).
    pub fn check_domain(&self, t: f64) -> Result<()> {
        let slack = 4.0 * f64::EPSILON * self.a.abs().max(self.b.abs()).max(1.0);
        if t.is_finite() && t >= self.a - slack && t <= self.b + slack {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} outside [{}, {}]",
                self.a, self.b
            )))
        }
    }

    /// f'(t): the analytic derivative when present, central differences
    /// otherwise.
    #[inline]
    pub fn derivative_at(&self, t: f64) -> Result<f64> {
        match &self.df {
            Some(df) => Ok(df(t)),
            None => central_diff(self, t),
        }
    }

    /// f' as a function on the same domain.
    pub fn derivative(&self) -> RealFunction {
        let f = match &self.df {
            Some(df) => df.clone(),
            None => {
                let me = self.clone();
                Arc::new(move |t| central_diff(&me, t).unwrap_or(f64::NAN)) as Fun
            }
        };
        Self {
            f,
            df: None,
            a: self.a,
            b: self.b,
            label: format!("d/dt {}", self.label),
        }
    }

    /// `(Qf)(t) = f(a + b - t)`; the derivative maps to `-f'(a + b - t)`.
    pub fn reflect(&self) -> RealFunction {
        let s = self.a + self.b;
        let f = self.f.clone();
        let df = self
            .df
            .clone()
            .map(|df| Arc::new(move |t: f64| -df(s - t)) as Fun);
        Self {
            f: Arc::new(move |t| f(s - t)),
            df,
            a: self.a,
            b: self.b,
            label: format!("Q[{}]", self.label),
        }
    }

    /// `c1 f + c2 g` on the common domain.
    pub fn combine(c1: f64, f: &RealFunction, c2: f64, g: &RealFunction) -> Result<RealFunction> {
        if f.domain() != g.domain() {
            return Err(Error::InvalidParameter(
                "functions live on different intervals".into(),
            ));
        }
        let (ff, gf) = (f.f.clone(), g.f.clone());
        let df = match (&f.df, &g.df) {
            (Some(df), Some(dg)) => {
                let (df, dg) = (df.clone(), dg.clone());
                Some(Arc::new(move |t: f64| c1 * df(t) + c2 * dg(t)) as Fun)
            }
            _ => None,
        };
        Ok(Self {
            f: Arc::new(move |t| c1 * ff(t) + c2 * gf(t)),
            df,
            a: f.a,
            b: f.b,
            label: format!("{c1}*{} + {c2}*{}", f.label, g.label),
        })
    }
}

/// Tolerances and limits for [`adaptive_gl`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
    pub panel_order: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_depth: 40,
            panel_order: 15,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be > 0".into(),
            ));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
        }
        if !(3..=MAX_ORDER).contains(&self.panel_order) {
            return Err(Error::InvalidParameter(format!(
                "panel_order must lie in 3..={MAX_ORDER}, got {}",
                self.panel_order
            )));
        }
        Ok(())
    }

    /// Same rule with both tolerances multiplied by `factor`. Outer
    /// integrals over quadrature-valued integrands use a looser setting than
    /// the inner ones.
    pub fn loosened(self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..self
        }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..self
        }
    }
}

const MAX_ORDER: usize = 50;
const MAX_PANELS: usize = 5000;
/// A single panel can pass the order-n vs order-(n-2) test while both rules
/// miss the same feature by far more than the tolerance.
const INITIAL_PANELS: usize = 4;

struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss-Legendre rule of order `n` on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn rule(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=MAX_ORDER).map(|n| gauss_legendre(n.max(1))).collect());
    &rules[n]
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    est: f64,
    err: f64,
    depth: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn eval_panel<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    order: usize,
    depth: usize,
) -> Result<Panel> {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let hi_rule = rule(order);
    let lo_rule = rule(order - 2);
    let mut s_hi = 0.0;
    for (x, w) in hi_rule.nodes.iter().zip(&hi_rule.weights) {
        let xi = c + r * x;
        let v = f(xi);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { x: xi });
        }
        s_hi += w * v;
    }
    let mut s_lo = 0.0;
    for (x, w) in lo_rule.nodes.iter().zip(&lo_rule.weights) {
        let xi = c + r * x;
        let v = f(xi);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { x: xi });
        }
        s_lo += w * v;
    }
    Ok(Panel {
        lo,
        hi,
        est: r * s_hi,
        err: (r * (s_hi - s_lo)).abs(),
        depth,
    })
}

/// `∫_lo^hi f` by globally adaptive Gauss-Legendre quadrature.
pub fn adaptive_gl<F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Domain(format!(
            "invalid integration range [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let order = cfg.panel_order;
    let width = (hi - lo) / INITIAL_PANELS as f64;
    let mut heap = BinaryHeap::with_capacity(64);
    for i in 0..INITIAL_PANELS {
        let a = lo + width * i as f64;
        let b = if i + 1 == INITIAL_PANELS {
            hi
        } else {
            a + width
        };
        heap.push(eval_panel(&f, a, b, order, 0)?);
    }
    let mut total: f64 = heap.iter().map(|p| p.est).sum();
    let mut total_err: f64 = heap.iter().map(|p| p.err).sum();

    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            // running sums drift; confirm with a clean resummation
            total = heap.iter().map(|p| p.est).sum();
            total_err = heap.iter().map(|p| p.err).sum();
            if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
                return Ok(total);
            }
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.depth >= cfg.max_depth || heap.len() >= MAX_PANELS {
            return Err(Error::DepthExceeded {
                lo: worst.lo,
                hi: worst.hi,
                depth: worst.depth,
                err: total_err,
            });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = eval_panel(&f, worst.lo, mid, order, worst.depth + 1)?;
        let right = eval_panel(&f, mid, worst.hi, order, worst.depth + 1)?;
        total += left.est + right.est - worst.est;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
}

/// `ψ(w) = w⁴(35 - 84w + 70w² - 20w³)`: ψ(0) = 0, ψ(1) = 1, ψ(w) + ψ(1-w) = 1,
/// and ψ' = 140 w³(1-w)³ vanishes to third order at both ends.
#[inline]
fn smoothstep(w: f64) -> f64 {
    let w2 = w * w;
    w2 * w2 * (35.0 + w * (-84.0 + w * (70.0 - 20.0 * w)))
}

#[inline]
fn smoothstep_deriv(w: f64) -> f64 {
    let v = w * (1.0 - w);
    140.0 * v * v * v
}

/// `∫_lo^hi f` after the endpoint-flattening substitution
/// `x = lo + (hi - lo) ψ(w)`.
///
/// The integrand receives `(x, x - lo, hi - x)`; the two distances are
/// computed from the nearer endpoint so they stay accurate when tiny.
pub fn graded_gl<F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if lo == hi {
        return Ok(0.0);
    }
    if !(lo < hi) {
        return Err(Error::Domain(format!(
            "invalid integration range [{lo}, {hi}]"
        )));
    }
    let len = hi - lo;
    adaptive_gl(
        |w| {
            let jac = len * smoothstep_deriv(w);
            if jac == 0.0 {
                return 0.0;
            }
            let (x, d_lo, d_hi) = if w < 0.5 {
                let d = len * smoothstep(w);
                (lo + d, d, len - d)
            } else {
                let d = len * smoothstep(1.0 - w);
                (hi - d, len - d, d)
            };
            f(x, d_lo, d_hi) * jac
        },
        0.0,
        1.0,
        cfg,
    )
}

/// Composite Gauss-Legendre with a fixed node set. Smooth in the endpoints,
/// which makes it suitable under a finite difference.
pub fn fixed_gl<F>(f: F, lo: f64, hi: f64, panels: usize, order: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if panels == 0 || !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidParameter(
            "fixed_gl needs panels >= 1 and a valid order".into(),
        ));
    }
    let g = rule(order);
    let h = (hi - lo) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let c = lo + (p as f64 + 0.5) * h;
        for (x, w) in g.nodes.iter().zip(&g.weights) {
            let xi = c + 0.5 * h * x;
            let v = f(xi);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { x: xi });
            }
            sum += w * v;
        }
    }
    Ok(0.5 * h * sum)
}

/// `∫_0^len d^{α-1} g(d) dd`, the weak singularity at `d = 0` removed by
/// `u = d^α`; `g` may carry an integrable singularity at `d = len`.
pub fn weakly_singular_quad<G>(g: G, alpha: f64, len: f64, cfg: &QuadConfig) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    if len < 0.0 {
        return Err(Error::Domain(format!("negative integration length {len}")));
    }
    if len == 0.0 {
        return Ok(0.0);
    }
    let upper = len.powf(alpha);
    let inv = 1.0 / alpha;
    let s = graded_gl(|u, _, _| g(u.powf(inv).min(len)), 0.0, upper, cfg)?;
    Ok(s / alpha)
}

/// Left Riemann-Liouville integral `(1/Γ(α)) ∫_a^t (t-s)^{α-1} f(s) ds`.
pub fn rl_weighted_quad(
    f: &RealFunction,
    alpha: f64,
    a: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    f.check_domain(a)?;
    f.check_domain(t)?;
    if t < a {
        return Err(Error::Domain(format!("t = {t} lies before the anchor {a}")));
    }
    if t == a {
        return Ok(0.0);
    }
    let s = weakly_singular_quad(|d| f.eval(t - d), alpha, t - a, cfg)?;
    Ok(s / gamma_fn(alpha)?)
}

/// Right Riemann-Liouville integral `(1/Γ(α)) ∫_t^b (s-t)^{α-1} f(s) ds`.
pub fn rl_weighted_quad_right(
    f: &RealFunction,
    alpha: f64,
    t: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    f.check_domain(b)?;
    f.check_domain(t)?;
    if t > b {
        return Err(Error::Domain(format!("t = {t} lies after the anchor {b}")));
    }
    if t == b {
        return Ok(0.0);
    }
    let s = weakly_singular_quad(|d| f.eval(t + d), alpha, b - t, cfg)?;
    Ok(s / gamma_fn(alpha)?)
}

/// Left Riemann-Liouville integral by panel product integration: Gauss
/// panels away from `t`, exact moments of a degree-8 interpolant of `f` on
/// the panel that touches the singularity. An independent route to
/// [`rl_weighted_quad`] for smooth `f`.
pub fn rl_product_panels(
    f: &RealFunction,
    alpha: f64,
    a: f64,
    t: f64,
    panels: usize,
) -> Result<f64> {
    f.check_domain(a)?;
    f.check_domain(t)?;
    if t <= a {
        return Ok(0.0);
    }
    let panels = panels.max(1);
    let h = (t - a) / panels as f64;
    // Smooth part: kernel (t-s)^{α-1} is analytic on every panel but the last.
    let mut smooth = 0.0;
    if panels > 1 {
        smooth = fixed_gl(
            |s| (t - s).powf(alpha - 1.0) * f.eval(s),
            a,
            t - h,
            panels - 1,
            20,
        )?;
    }
    // Singular panel in d = t - s ∈ [0, h]: f(t - h v) ≈ Σ c_j v^j.
    const DEG: usize = 8;
    let nodes: Vec<f64> = (0..=DEG)
        .map(|i| {
            0.5 - 0.5 * ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * (DEG + 1)) as f64).cos()
        })
        .collect();
    let mut vand = vec![vec![0.0; DEG + 1]; DEG + 1];
    let mut rhs = vec![0.0; DEG + 1];
    for (i, &v) in nodes.iter().enumerate() {
        for (j, cell) in vand[i].iter_mut().enumerate() {
            *cell = v.powi(j as i32);
        }
        rhs[i] = f.eval(t - h * v);
    }
    let coeffs = solve_dense(vand, rhs)?;
    // ∫_0^h d^{α-1} (d/h)^j dd = h^α / (α + j)
    let sing: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c / (alpha + j as f64))
        .sum::<f64>()
        * h.powf(alpha);
    Ok((smooth + sing) / gamma_fn(alpha)?)
}

/// Gaussian elimination with partial pivoting for small dense systems.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::InvalidParameter(
                "singular interpolation system".into(),
            ));
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Ok(x)
}

/// Central difference `(f(t+h) - f(t-h)) / 2h` with `h = ε^{1/3} max(1, |t|)`,
/// switching to a one-sided second-order formula within `h` of an endpoint.
pub fn central_diff(f: &RealFunction, t: f64) -> Result<f64> {
    f.check_domain(t)?;
    let h = f64::EPSILON.cbrt() * t.abs().max(1.0);
    let (a, b) = f.domain();
    if t - h < a {
        Ok((-3.0 * f.eval(t) + 4.0 * f.eval(t + h) - f.eval(t + 2.0 * h)) / (2.0 * h))
    } else if t + h > b {
        Ok((3.0 * f.eval(t) - 4.0 * f.eval(t - h) + f.eval(t - 2.0 * h)) / (2.0 * h))
    } else {
        Ok((f.eval(t + h) - f.eval(t - h)) / (2.0 * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in [3usize, 13, 15, 20] {
            let r = rule(n);
            let wsum: f64 = r.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14, "n = {n}");
            // ∫_{-1}^{1} x^{2n-2} = 2/(2n-1)
            let p = 2 * n - 2;
            let s: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(p as i32))
                .sum();
            assert!((s - 2.0 / (p as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn adaptive_examples() {
        assert!((adaptive_gl(|x| x, 0.0, 1.0, &cfg()).unwrap() - 0.5).abs() < 1e-15);
        assert!((adaptive_gl(f64::sin, 0.0, PI, &cfg()).unwrap() - 2.0).abs() < 1e-12);
        let golden = 1.0 / 12.0 + 8.0 / (105.0 * PI.sqrt());
        let v = adaptive_gl(
            |x| (1.0 - x) * (x / 2.0 + 2.0 * x.powf(1.5) / (3.0 * PI.sqrt())),
            0.0,
            1.0,
            &cfg(),
        )
        .unwrap();
        assert!((v - golden).abs() < 1e-10);
    }

    #[test]
    fn adaptive_handles_kinks_and_peaks() {
        let v = adaptive_gl(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
        let v = adaptive_gl(|x: f64| 1.0 / (1e-4 + (x - 0.5).powi(2)), 0.0, 1.0, &cfg()).unwrap();
        let want = 2.0 * (0.5f64 / 1e-2).atan() / 1e-2;
        assert!((v - want).abs() < 1e-7 * want);
    }

    #[test]
    fn adaptive_errors() {
        assert!(matches!(
            adaptive_gl(|x| 1.0 / x, 0.0, 1.0, &cfg()),
            Err(Error::DepthExceeded { .. })
        ));
        assert!(matches!(
            adaptive_gl(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &cfg()),
            Err(Error::NonFiniteIntegrand { .. })
        ));
        let bad = QuadConfig {
            max_depth: 0,
            ..cfg()
        };
        assert!(adaptive_gl(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn graded_removes_endpoint_singularities() {
        // ∫_0^1 x^{-0.7} (1-x)^{-0.5} dx = B(0.3, 0.5)
        let v = graded_gl(|_, dl, dh| dl.powf(-0.7) * dh.powf(-0.5), 0.0, 1.0, &cfg()).unwrap();
        let want = gamma_fn(0.3).unwrap() * gamma_fn(0.5).unwrap() / gamma_fn(0.8).unwrap();
        assert!((v - want).abs() < 1e-8 * want, "{v} vs {want}");
    }

    #[test]
    fn rl_examples() {
        let one = RealFunction::constant(0.0, 1.0, 1.0).unwrap();
        let v = rl_weighted_quad(&one, 0.5, 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 1.0 / gamma_fn(1.5).unwrap()).abs() < 1e-12);

        let id = RealFunction::new(0.0, 2.0, |x| x).unwrap();
        for x in [0.25, 1.0, 1.7] {
            let v = rl_weighted_quad(&id, 0.5, 0.0, x, &cfg()).unwrap();
            let want = 4.0 * x * x.sqrt() / (3.0 * PI.sqrt());
            assert!((v - want).abs() < 1e-12, "x = {x}");
        }

        let sq = RealFunction::new(0.0, 1.0, |x| x * x).unwrap();
        let v = rl_weighted_quad(&sq, 0.5, 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 0.601_802_222_450_94).abs() < 1e-12);

        assert_eq!(rl_weighted_quad(&sq, 0.5, 0.0, 0.0, &cfg()).unwrap(), 0.0);
        assert!(matches!(
            rl_weighted_quad(&sq, 0.5, 0.0, 1.5, &cfg()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rl_monomial_rule() {
        for beta in 0..=3 {
            for alpha in [0.25, 0.5, 0.75] {
                let f = RealFunction::new(0.5, 2.0, move |s| (s - 0.5).powi(beta)).unwrap();
                let t = 1.9;
                let v = rl_weighted_quad(&f, alpha, 0.5, t, &cfg()).unwrap();
                let b = beta as f64;
                let want = gamma_fn(b + 1.0).unwrap() * (t - 0.5).powf(alpha + b)
                    / gamma_fn(alpha + b + 1.0).unwrap();
                assert!((v - want).abs() < 1e-9, "alpha {alpha} beta {beta}");
            }
        }
    }

    #[test]
    fn substitution_agrees_with_product_panels() {
        let f = RealFunction::new(0.0, 1.0, |x: f64| (3.0 * x).sin() + x * x * (1.0 - x).exp())
            .unwrap();
        for alpha in [0.2, 0.5, 0.9] {
            for t in [0.1, 0.55, 1.0] {
                let sub = rl_weighted_quad(&f, alpha, 0.0, t, &cfg()).unwrap();
                let prod = rl_product_panels(&f, alpha, 0.0, t, 16).unwrap();
                assert!(
                    (sub - prod).abs() < 1e-7,
                    "alpha {alpha} t {t}: {sub} vs {prod}"
                );
            }
        }
    }

    #[test]
    fn right_rl_mirrors_left() {
        let f = RealFunction::new(0.0, 1.0, |x: f64| x.exp() * x).unwrap();
        let q = f.reflect();
        for t in [0.0, 0.3, 0.8] {
            let l = rl_weighted_quad(&q, 0.4, 0.0, t, &cfg()).unwrap();
            let r = rl_weighted_quad_right(&f, 0.4, 1.0 - t, 1.0, &cfg()).unwrap();
            assert!((l - r).abs() < 1e-11);
        }
    }

    #[test]
    fn central_diff_examples() {
        let sq = RealFunction::new(-3.0, 3.0, |x| x * x).unwrap();
        assert!((central_diff(&sq, 1.0).unwrap() - 2.0).abs() < 1e-9);
        let s = RealFunction::new(-1.0, 1.0, f64::sin).unwrap();
        assert!((central_diff(&s, 0.0).unwrap() - 1.0).abs() < 1e-9);
        let e = RealFunction::new(0.0, 2.0, f64::exp).unwrap();
        assert!((central_diff(&e, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-8);
        // one-sided near the ends
        assert!((central_diff(&e, 0.0).unwrap() - 1.0).abs() < 1e-8);
        assert!((central_diff(&e, 2.0).unwrap() - 2.0f64.exp()).abs() < 1e-7);
        assert!(matches!(central_diff(&e, 2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn reflection_is_an_involution() {
        let f = RealFunction::with_derivative(0.0, 1.0, |t| t * t, |t| 2.0 * t).unwrap();
        let q = f.reflect();
        assert_eq!(q.eval(0.25), 0.5625);
        assert_eq!(q.derivative_at(0.25).unwrap(), -1.5);
        let qq = q.reflect();
        for t in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((qq.eval(t) - f.eval(t)).abs() < 1e-15);
        }
    }
}
