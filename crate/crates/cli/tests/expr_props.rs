//! Printer/parser round trip and symbolic derivatives on random expressions.

use mlfrac_cli::expr::{parse_expr, BinOp, Constant, Expr, Func};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        4 => Just(Expr::X),
        2 => (0u32..40).prop_map(|n| Expr::Num(n as f64 / 4.0)),
        1 => Just(Expr::Const(Constant::Pi)),
        1 => Just(Expr::Const(Constant::E)),
    ]
}

fn any_expr() -> impl Strategy<Value = Expr> {
    let funcs = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Gamma,
    ];
    let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow];
    leaf().prop_recursive(5, 40, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (
                proptest::sample::select(ops.to_vec()),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
            (proptest::sample::select(funcs.to_vec()), inner)
                .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

/// Expressions that stay smooth and moderate for x in [0.5, 1.5].
fn safe_expr() -> impl Strategy<Value = Expr> {
    let smooth = [Func::Sin, Func::Cos, Func::Exp];
    let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul];
    leaf().prop_recursive(4, 20, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (
                proptest::sample::select(ops.to_vec()),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
            (proptest::sample::select(smooth.to_vec()), inner.clone())
                .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            // positive arguments for the functions with restricted domains
            (
                proptest::sample::select(vec![Func::Ln, Func::Sqrt, Func::Gamma]),
                inner.clone()
            )
                .prop_map(|(f, a)| Expr::Call(f, Box::new(shift_positive(a)))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(
                BinOp::Div,
                Box::new(a),
                Box::new(shift_positive(b))
            )),
            (inner, 0u32..4).prop_map(|(a, n)| Expr::Bin(
                BinOp::Pow,
                Box::new(a),
                Box::new(Expr::Num(n as f64))
            )),
        ]
    })
}

// 2 + sin(a)^2, bounded away from 0
fn shift_positive(a: Expr) -> Expr {
    let sq = Expr::Bin(
        BinOp::Pow,
        Box::new(Expr::Call(Func::Sin, Box::new(a))),
        Box::new(Expr::Num(2.0)),
    );
    Expr::Bin(BinOp::Add, Box::new(Expr::Num(2.0)), Box::new(sq))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(e in any_expr()) {
        let text = e.to_string();
        let parsed = parse_expr(&text).unwrap();
        prop_assert_eq!(&parsed, &e, "printed as {}", text);
        let again = parse_expr(&parsed.to_string()).unwrap();
        prop_assert_eq!(again, parsed);
    }

    #[test]
    fn symbolic_derivative_matches_differences(e in safe_expr(), x in 0.5f64..1.5) {
        let d = e.derivative();
        let (Ok(sym), Ok(_)) = (d.eval(x), e.eval(x)) else { return Ok(()) };
        let f = e.to_function(0.0, 2.0).unwrap();
        let fd = mlfrac::central_diff(&f, x).unwrap();
        prop_assume!(sym.abs() < 1e6);
        // truncation of the difference quotient, h^2 |f'''| / 6 with the step
        // central_diff uses
        let h = f64::EPSILON.cbrt() * x.abs().max(1.0);
        let d3 = d.derivative().derivative().eval(x).unwrap_or(f64::INFINITY);
        let trunc = h * h * d3.abs() / 6.0;
        let scale = 1.0 + sym.abs() + e.eval(x).unwrap().abs();
        prop_assert!((sym - fd).abs() <= 1e-7 * scale + 2.0 * trunc, "{} at {}: symbolic {} vs fd {}", e, x, sym, fd);
    }
}
