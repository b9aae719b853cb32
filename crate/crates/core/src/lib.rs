//! Fractional calculus with nonsingular Mittag-Leffler kernels.
//!
//! Left and right Atangana-Baleanu integrals, Caputo-type (ABC) and
//! Riemann-Liouville-type (ABR) derivatives, their classical
//! Riemann-Liouville counterparts, numerical checks of the identities that
//! relate them, and fractional Euler-Lagrange solvers.
//!
//! ```
//! use mlfrac::{ab_integral, FracOrder, QuadConfig, RealFunction, Side};
//!
//! let f = RealFunction::new(0.0, 1.0, |x| x).unwrap();
//! let ord = FracOrder::unit(0.5).unwrap();
//! let v = ab_integral(Side::Left, &f, &ord, 1.0, &QuadConfig::default()).unwrap();
//! let want = 0.5 + 2.0 / (3.0 * std::f64::consts::PI.sqrt());
//! assert!((v - want).abs() < 1e-12);
//! ```

// NaN must fail parameter checks, hence the `!(x > 0.0)` form.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod identities;
pub mod operators;
pub mod quadrature;
pub mod special_fn;
pub mod variational;

pub use error::{Error, Result};
pub use identities::{IdentityReport, Quantity, VerifyConfig};
pub use operators::{
    ab_integral, abc_derivative, abr_derivative, gen_ml_integral, q_reflect, rl_derivative,
    rl_integral, FracOrder, GridFunction, OpKind, Side,
};
pub use quadrature::{adaptive_gl, central_diff, rl_weighted_quad, QuadConfig, RealFunction};
pub use special_fn::{gamma_fn, ml, ml_eval, pochhammer, polygamma, MlParams, SeriesResult};
pub use variational::{
    solve_free_particle, solve_quadratic_potential, LagrangianEval, SolverConfig,
};
