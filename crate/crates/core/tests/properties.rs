use mlfrac::identities::polynomial;
use mlfrac::operators::{abc_derivative, FracOrder, OpKind, Side};
use mlfrac::quadrature::{adaptive_gl, central_diff, rl_weighted_quad, QuadConfig, RealFunction};
use mlfrac::special_fn::{gamma_fn, ml, ml2_eval, ml_eval, MlParams};
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 4)
}

fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * x + ck)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_normalizes_ml_at_zero(rho in 0.1..3.0f64, beta in 0.01..50.0f64) {
        let v = ml(rho, beta, 1.0, 0.0).unwrap() * gamma_fn(beta).unwrap();
        prop_assert!((v - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn one_parameter_ml_is_exp(z in -10.0..10.0f64) {
        let v = ml(1.0, 1.0, 1.0, z).unwrap();
        prop_assert!((v - z.exp()).abs() <= 1e-12 * z.abs().exp());
    }

    #[test]
    fn order_two_ml_is_cosine(z in -25.0..0.0f64) {
        let v = ml(2.0, 1.0, 1.0, z).unwrap();
        prop_assert!((v - (-z).sqrt().cos()).abs() <= 1e-11);
    }

    #[test]
    fn two_parameter_path_agrees_with_general(rho in 0.2..2.5f64, mu in 0.1..5.0f64, z in -5.0..5.0f64) {
        // small rho with large |z| overflows; both paths must then fail alike
        match (ml2_eval(rho, mu, z), ml_eval(&MlParams::new(rho, mu, 1.0).unwrap(), z)) {
            (Ok(a), Ok(b)) => prop_assert!((a.value - b.value).abs() <= 1e-14 * a.value.abs().max(1.0)),
            (Err(a), Err(b)) => prop_assert_eq!(std::mem::discriminant(&a), std::mem::discriminant(&b)),
            (a, b) => prop_assert!(false, "paths disagree: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn adaptive_gl_is_linear(c1 in coeffs(), c2 in coeffs(), s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let cfg = QuadConfig::default();
        let q = |f: &dyn Fn(f64) -> f64| adaptive_gl(f, -0.5, 1.5, &cfg).unwrap();
        let lhs = q(&|x| s * eval_poly(&c1, x) + t * eval_poly(&c2, x));
        let rhs = s * q(&|x| eval_poly(&c1, x)) + t * q(&|x| eval_poly(&c2, x));
        let tol = cfg.abs_tol.max(cfg.rel_tol * lhs.abs());
        prop_assert!((lhs - rhs).abs() <= 2.0 * tol);
    }

    #[test]
    fn central_diff_matches_analytic(c in coeffs(), x in 0.0..1.0f64) {
        let f = polynomial(&c, 0.0, 1.0).unwrap();
        let plain = RealFunction::new(0.0, 1.0, move |t| eval_poly(&c, t)).unwrap();
        let fd = central_diff(&plain, x).unwrap();
        prop_assert!((fd - f.derivative_at(x).unwrap()).abs() <= 1e-7);
    }

    #[test]
    fn operators_are_linear(c1 in coeffs(), c2 in coeffs(), s in -2.0..2.0f64, t in -2.0..2.0f64,
                            ai in 0..3usize, x in 0.05..0.95f64) {
        let cfg = QuadConfig::default();
        let ord = FracOrder::unit([0.3, 0.5, 0.7][ai]).unwrap();
        let f = polynomial(&c1, 0.0, 1.0).unwrap();
        let g = polynomial(&c2, 0.0, 1.0).unwrap();
        let h = RealFunction::combine(s, &f, t, &g).unwrap();
        for op in [OpKind::RlIntegral, OpKind::AbIntegral, OpKind::Abc, OpKind::Abr, OpKind::RlDerivative] {
            for side in [Side::Left, Side::Right] {
                let lhs = op.apply(side, &h, &ord, x, &cfg).unwrap();
                let rhs = s * op.apply(side, &f, &ord, x, &cfg).unwrap() + t * op.apply(side, &g, &ord, x, &cfg).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-8, "{:?} {:?}", op, side);
            }
        }
    }

    #[test]
    fn constant_kill(c in -10.0..10.0f64, alpha in 0.05..0.99f64, x in 0.0..1.0f64) {
        let f = RealFunction::constant(0.0, 1.0, c).unwrap();
        let ord = FracOrder::unit(alpha).unwrap();
        for side in [Side::Left, Side::Right] {
            prop_assert!(abc_derivative(side, &f, &ord, x, &QuadConfig::default()).unwrap().abs() <= 1e-10);
        }
    }
}

#[test]
fn rl_monomial_rule() {
    let cfg = QuadConfig::default();
    for beta in 0..=3 {
        for alpha in [0.25, 0.5, 0.75] {
            let f = RealFunction::new(-1.0, 1.0, move |s| (s + 1.0).powi(beta)).unwrap();
            for t in [-0.5, 0.2, 1.0] {
                let v = rl_weighted_quad(&f, alpha, -1.0, t, &cfg).unwrap();
                let b = beta as f64;
                let want = gamma_fn(b + 1.0).unwrap() * (t + 1.0).powf(alpha + b)
                    / gamma_fn(alpha + b + 1.0).unwrap();
                assert!((v - want).abs() <= 1e-9, "alpha {alpha} beta {beta} t {t}");
            }
        }
    }
}

#[test]
fn erfc_oracle_for_half_order() {
    // E_{1/2}(z) = exp(z²) erfc(-z)
    for i in 0..=60 {
        let z = -3.0 + 0.05 * i as f64;
        let v = ml(0.5, 1.0, 1.0, z).unwrap();
        let want = (z * z).exp() * libm::erfc(-z);
        assert!((v - want).abs() <= 1e-11, "z {z}: {v} vs {want}");
    }
}

#[test]
fn eigenfunction_derivative_agrees_with_differences() {
    let ord = FracOrder::unit(0.5).unwrap();
    for (sigma, nu) in [(0.0, 1.5), (1.0, 1.5), (1.0, 2.0)] {
        let f = mlfrac::identities::eigenfunction(sigma, nu, &ord, 1.0).unwrap();
        let plain = RealFunction::new(0.0, 1.0, {
            let f = f.clone();
            move |t| f.eval(t)
        })
        .unwrap();
        for x in [0.2, 0.5, 0.9] {
            let an = f.derivative_at(x).unwrap();
            assert!((central_diff(&plain, x).unwrap() - an).abs() <= 1e-7);
        }
    }
}
