//! Fractional Euler-Lagrange residuals, natural boundary conditions and the
//! two worked problems: the free particle and the quadratic potential.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::{
    ab_integral_grid, abc_derivative, abr_derivative, gen_ml_integral, FracOrder, GridFunction,
    MlKernel, Side,
};
use crate::quadrature::{QuadConfig, RealFunction};
use crate::special_fn::{gamma_fn, MlParams};

/// Builds a function of time from a trajectory.
pub type TrajectoryMap =
    Arc<dyn Fn(&RealFunction, &FracOrder, &QuadConfig) -> Result<RealFunction> + Send + Sync>;

/// Partial derivatives of a Lagrangian `L(t, y, D y)` along a trajectory:
/// `l1 = ∂L/∂y`, `l2 = ∂L/∂(D y)`, where `D` is the ABC derivative on
/// `deriv_side`.
#[derive(Clone)]
pub struct LagrangianEval {
    pub l1: TrajectoryMap,
    pub l2: TrajectoryMap,
    pub deriv_side: Side,
}

impl LagrangianEval {
    /// `L = ½ (ABC_0 D y)² - V(y)`, given `V'`.
    pub fn kinetic_minus_potential<V>(dv: V) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let dv = Arc::new(dv);
        let l1: TrajectoryMap = Arc::new(move |y, _, _| {
            let (y, dv) = (y.clone(), dv.clone());
            RealFunction::new(y.a(), y.b(), move |t| -dv(y.eval(t)))
        });
        let l2: TrajectoryMap = Arc::new(|y, ord, cfg| abc_function(Side::Left, y, ord, cfg));
        Self {
            l1,
            l2,
            deriv_side: Side::Left,
        }
    }

    /// The free Lagrangian `½ (ABC_0 D y)²`.
    pub fn free() -> Self {
        Self::kinetic_minus_potential(|_| 0.0)
    }
}

/// `t ↦ ABC D y(t)` as a function with derivative
/// `(B/(1-α)) y'(anchor) E_α(λ dist^α) + ABC D[y'](t)`, from differentiating
/// `∫_0^dist y'(t ∓ d) E_α(λ d^α) dd` in `t`.
pub fn abc_function(
    side: Side,
    y: &RealFunction,
    ord: &FracOrder,
    cfg: &QuadConfig,
) -> Result<RealFunction> {
    ord.check_kernel()?;
    let dy = y.derivative();
    let dy_anchor = y.derivative_at(side.anchor(y))?;
    let kernel = MlKernel::for_order(ord, y.b() - y.a())?;
    let (y1, o1, c1, o2, c2) = (y.clone(), *ord, *cfg, *ord, *cfg);
    let y2 = y.clone();
    RealFunction::with_derivative(
        y.a(),
        y.b(),
        move |t| abc_derivative(side, &y1, &o1, t, &c1).unwrap_or(f64::NAN),
        move |t| {
            let boundary = if dy_anchor == 0.0 {
                0.0
            } else {
                o2.scale() * dy_anchor * kernel.eval(side.distance(&y2, t)).unwrap_or(f64::NAN)
            };
            boundary + abc_derivative(side, &dy, &o2, t, &c2).unwrap_or(f64::NAN)
        },
    )
    .map(|f| f.labeled(format!("ABC-D[{}]", y.label())))
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub grid_n: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_n: 200,
            fp_tol: 1e-8,
            fp_max_iter: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid_n must be >= 8, got {}",
                self.grid_n
            )));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::InvalidParameter("fp_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Euler-Lagrange residual `L1(s) + ABR D L2(s)` on `n` cells of `[lo, hi]`,
/// the derivative taken on the side opposite to the one in the Lagrangian.
/// Points where an operator fails hold NaN.
pub fn el_residual(
    lag: &LagrangianEval,
    y: &RealFunction,
    ord: &FracOrder,
    lo: f64,
    hi: f64,
    n: usize,
    cfg: &QuadConfig,
) -> Result<GridFunction> {
    y.check_domain(lo)?;
    y.check_domain(hi)?;
    let l1 = (lag.l1)(y, ord, cfg)?;
    let l2 = (lag.l2)(y, ord, cfg)?;
    let side = lag.deriv_side.opposite();
    let values = GridFunction::nodes(lo, hi, n)
        .into_par_iter()
        .map(|s| {
            let r = abr_derivative(side, &l2, ord, s, cfg).map(|d| l1.eval(s) + d);
            r.ok().filter(|v| v.is_finite()).unwrap_or(f64::NAN)
        })
        .collect();
    GridFunction::new(lo, hi, values)
}

/// [`el_residual`] on `[0.1 b, b]`, away from the anchor singularities.
pub fn el_residual_default(
    lag: &LagrangianEval,
    y: &RealFunction,
    ord: &FracOrder,
    n: usize,
    cfg: &QuadConfig,
) -> Result<GridFunction> {
    let b = y.b();
    let lo = y.a() + 0.1 * (b - y.a());
    el_residual(lag, y, ord, lo, b, n, cfg)
}

/// Sup-norm of a residual; NaN entries make it infinite.
pub fn residual_sup(r: &GridFunction) -> f64 {
    r.values
        .iter()
        .map(|v| if v.is_nan() { f64::INFINITY } else { v.abs() })
        .fold(0.0, f64::max)
}

/// Natural boundary condition: the generalized ML operator
/// (`γ = μ = 1`, `ρ = α`, `ω = λ`) of `L2` on `side`, at `a` and at `b`.
pub fn natural_bc(
    l2_traj: &RealFunction,
    ord: &FracOrder,
    side: Side,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    ord.check_kernel()?;
    let p = MlParams::one_param(ord.alpha())?;
    let at = |x| gen_ml_integral(side, &p, ord.lambda(), l2_traj, x, cfg);
    Ok((at(l2_traj.a())?, at(l2_traj.b())?))
}

/// `y0 + A α t^{α-1} / (B Γ(α))` on `[0, b]`; `A = 1` gives the textbook
/// solution.
pub fn free_particle_function(
    ord: &FracOrder,
    y0: f64,
    amplitude: f64,
    b: f64,
) -> Result<RealFunction> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("b must be > 0, got {b}")));
    }
    let al = ord.alpha();
    let c = amplitude * al / (ord.b_norm() * gamma_fn(al)?);
    RealFunction::with_derivative(
        0.0,
        b,
        move |t| y0 + c * t.powf(al - 1.0),
        move |t| c * (al - 1.0) * t.powf(al - 2.0),
    )
    .map(|f| f.labeled("free particle"))
}

/// Samples of the free-particle solution. Node 0 is singular for `α < 1`; it
/// holds `y0` and is listed in `singular`.
pub fn solve_free_particle(
    ord: &FracOrder,
    y0: f64,
    b: f64,
    cfg: &SolverConfig,
    amplitude: f64,
) -> Result<GridFunction> {
    cfg.validate()?;
    let f = free_particle_function(ord, y0, amplitude, b)?;
    let mut g = GridFunction::sample(0.0, b, cfg.grid_n, |t| {
        Ok(if t == 0.0 { y0 } else { f.eval(t) })
    })?;
    if ord.alpha() < 1.0 {
        g.singular.push(0);
    }
    Ok(g)
}

/// Converged fixed point of the quadratic-potential integral equation.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub y: GridFunction,
    pub iterations: usize,
    /// Largest observed ratio of successive sup-norm changes.
    pub q: f64,
    /// `|c| K` with `K = ‖AB_0 I AB I_b 1‖∞`, the norm of the positive
    /// composite operator on the grid.
    pub contraction_estimate: f64,
    /// `‖y - y0 - c AB_0 I AB I_b y‖∞` with the grid operators.
    pub residual: f64,
    pub changes: Vec<f64>,
}

/// `AB_0 I (AB I_b y)` with both integrals applied exactly to piecewise-linear
/// interpolants.
pub fn ab_composite(y: &GridFunction, ord: &FracOrder) -> Result<GridFunction> {
    let inner = ab_integral_grid(Side::Right, y, ord)?;
    ab_integral_grid(Side::Left, &inner, ord)
}

/// Picard iteration `y ← y0 + c AB_0 I AB I_b y` on `[0, b]`.
pub fn solve_quadratic_potential(
    ord: &FracOrder,
    c: f64,
    y0: f64,
    b: f64,
    cfg: &SolverConfig,
) -> Result<FixedPoint> {
    cfg.validate()?;
    if !(b > 0.0 && c.is_finite() && y0.is_finite()) {
        return Err(Error::InvalidParameter(
            "need b > 0 and finite c, y0".into(),
        ));
    }
    let n = cfg.grid_n;
    let ones = GridFunction::new(0.0, b, vec![1.0; n + 1])?;
    let k_norm = ab_composite(&ones, ord)?.sup_norm();
    let step = |y: &GridFunction| -> Result<GridFunction> {
        Ok(ab_composite(y, ord)?.map(|_, v| y0 + c * v))
    };

    let mut y = GridFunction::new(0.0, b, vec![y0; n + 1])?;
    let mut changes = Vec::new();
    let mut q: f64 = 0.0;
    let mut growth = 0;
    for it in 1..=cfg.fp_max_iter {
        let next = step(&y)?;
        let change = next.max_abs_diff(&y);
        if !change.is_finite() {
            return Err(Error::Divergence {
                iterations: it,
                last_change: change,
            });
        }
        if let Some(&prev) = changes.last() {
            if prev > 1e3 * f64::EPSILON * y0.abs().max(1.0) {
                q = q.max(change / prev);
            }
            growth = if change > prev { growth + 1 } else { 0 };
            if growth >= 5 {
                return Err(Error::Divergence {
                    iterations: it,
                    last_change: change,
                });
            }
        }
        changes.push(change);
        y = next;
        if change <= cfg.fp_tol {
            let residual = step(&y)?.max_abs_diff(&y);
            return Ok(FixedPoint {
                y,
                iterations: it,
                q,
                contraction_estimate: c.abs() * k_norm,
                residual,
                changes,
            });
        }
    }
    Err(Error::Divergence {
        iterations: cfg.fp_max_iter,
        last_change: changes.last().copied().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::{ab_integral_function, polynomial};
    use crate::operators::rl_integral_grid;

    fn half() -> FracOrder {
        FracOrder::unit(0.5).unwrap()
    }

    #[test]
    fn constant_trajectory_is_an_extremal_of_the_free_action() {
        let y = polynomial(&[0.7], 0.0, 1.0).unwrap();
        let r = el_residual_default(
            &LagrangianEval::free(),
            &y,
            &half(),
            10,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!(residual_sup(&r) < 1e-8);
    }

    #[test]
    fn residual_of_known_derivative() {
        // y = AB_0 I t² has ABC_0 D y = t², so the free residual is ABR D_b t².
        let cfg = QuadConfig::default();
        let o = half();
        let t2 = polynomial(&[0.0, 0.0, 1.0], 0.0, 1.0).unwrap();
        let y = ab_integral_function(Side::Left, &t2, &o, &cfg).unwrap();
        let l2 = abc_function(Side::Left, &y, &o, &cfg).unwrap();
        for t in [0.2, 0.5, 0.9] {
            assert!((l2.eval(t) - t * t).abs() < 1e-8);
            assert!(
                (l2.derivative_at(t).unwrap() - 2.0 * t).abs() < 1e-6,
                "t {t}"
            );
        }
        let r = el_residual(&LagrangianEval::free(), &y, &o, 0.2, 1.0, 4, &cfg).unwrap();
        for (s, v) in r.ts().into_iter().zip(&r.values) {
            let want = abr_derivative(Side::Right, &t2, &o, s, &cfg).unwrap();
            assert!((v - want).abs() < 1e-5, "s {s}: {v} vs {want}");
        }
    }

    #[test]
    fn natural_bc_examples() {
        let cfg = QuadConfig::default();
        let o = half();
        let zero = polynomial(&[0.0], 0.0, 1.0).unwrap();
        assert_eq!(
            natural_bc(&zero, &o, Side::Right, &cfg).unwrap(),
            (0.0, 0.0)
        );
        let t = polynomial(&[0.0, 1.0], 0.0, 1.0).unwrap();
        let (at0, at1) = natural_bc(&t, &o, Side::Right, &cfg).unwrap();
        assert_eq!(at1, 0.0);
        // direct quadrature of ∫_0^1 E_{1/2}(-s^{1/2}) s ds
        let direct = crate::quadrature::graded_gl(
            |s, _, _| crate::special_fn::ml(0.5, 1.0, 1.0, -s.sqrt()).unwrap() * s,
            0.0,
            1.0,
            &cfg,
        )
        .unwrap();
        assert!((at0 - direct).abs() < 1e-8);
    }

    #[test]
    fn free_particle_examples() {
        let cfg = SolverConfig::default();
        let g = solve_free_particle(&half(), 0.0, 1.0, &cfg, 1.0).unwrap();
        assert!((g.values[cfg.grid_n] - 0.282_094_791_8).abs() < 1e-10);
        assert_eq!(g.singular, vec![0]);
        assert_eq!(g.values[0], 0.0);
        let g = solve_free_particle(&FracOrder::unit(0.999).unwrap(), 0.3, 2.0, &cfg, 1.0).unwrap();
        for (t, v) in g.ts().into_iter().zip(&g.values) {
            if (0.5..=2.0).contains(&t) {
                assert!((v - 1.3).abs() < 5e-3);
            }
        }
    }

    #[test]
    fn quadratic_potential_fixed_point() {
        let cfg = SolverConfig::default();
        let sol = solve_quadratic_potential(&half(), 0.1, 1.0, 1.0, &cfg).unwrap();
        assert!(sol.residual <= 1e-7, "{}", sol.residual);
        assert!(sol.q < 1.0 && sol.q > 0.0);
        assert!(sol.contraction_estimate < 1.0);
        let zero = solve_quadratic_potential(&half(), 0.0, 2.0, 1.0, &cfg).unwrap();
        assert_eq!(zero.iterations, 1);
        assert!(zero.y.values.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn fixed_point_residual_and_contraction_for_several_c() {
        let cfg = SolverConfig::default();
        for c in [0.05, 0.1, 0.2] {
            let sol = solve_quadratic_potential(&half(), c, 1.0, 1.0, &cfg).unwrap();
            assert!(sol.residual <= 10.0 * cfg.fp_tol, "c {c}");
            for w in sol.changes.windows(2).skip(1) {
                if w[0] > 1e-13 {
                    assert!(w[1] / w[0] <= sol.q + 1e-12);
                }
            }
            assert!(sol.q < 1.0);
        }
    }

    #[test]
    fn fixed_point_is_grid_stable() {
        let coarse =
            solve_quadratic_potential(&half(), 0.1, 1.0, 1.0, &SolverConfig::default()).unwrap();
        let fine = solve_quadratic_potential(
            &half(),
            0.1,
            1.0,
            1.0,
            &SolverConfig {
                grid_n: 400,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        let gap = coarse
            .y
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - fine.y.values[2 * i]).abs())
            .fold(0.0, f64::max);
        assert!(gap <= 5e-4, "{gap}");
    }

    #[test]
    fn large_coupling_diverges() {
        let err = solve_quadratic_potential(&half(), 50.0, 1.0, 1.0, &SolverConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn composite_matches_continuous_operators_on_linear_data() {
        // for linear y the inner AB I_b is exact; the outer sees its interpolant
        let o = half();
        let y = GridFunction::sample(0.0, 1.0, 64, |t| Ok(1.0 + t)).unwrap();
        let inner = ab_integral_grid(Side::Right, &y, &o).unwrap();
        let cont = polynomial(&[1.0, 1.0], 0.0, 1.0).unwrap();
        for (i, t) in y.ts().into_iter().enumerate() {
            let want =
                crate::operators::ab_integral(Side::Right, &cont, &o, t, &QuadConfig::default())
                    .unwrap();
            assert!((inner.values[i] - want).abs() < 1e-12);
        }
        assert!(rl_integral_grid(Side::Left, &y, 0.5).is_ok());
    }
}
