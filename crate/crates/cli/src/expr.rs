//! Expressions in one variable `x`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | ln | sqrt | abs | gamma
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-2^2 = -4` and `2^3^2 = 512`.
//!
//! Symbolic derivatives may contain two heads the parser does not accept:
//! `sign(u)` from `abs` and `polygamma(n, u)` from `gamma`.

use std::fmt;

use mlfrac::special_fn::{gamma_fn, polygamma};
use mlfrac::{RealFunction, Result as CoreResult};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Gamma,
    /// Derivative-only: sign of the argument, 0 at 0.
    Sign,
}

impl Func {
    const PARSEABLE: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Gamma => "gamma",
            Func::Sign => "sign",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Self::PARSEABLE.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Const(Constant),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Polygamma(u32, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{what} at x = {x}")]
pub struct EvalError {
    pub x: f64,
    pub what: String,
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(&["operator", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn syntax(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin(
                BinOp::Pow,
                Box::new(base),
                Box::new(self.unary()?),
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        const START: [&str; 4] = ["number", "identifier", "'('", "'-'"];
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax(&["operator", "')'"]));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.syntax(&START)),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax(&["digit"]));
        }
        // exponent only when digits follow, so `2e` stays `2` then `e`
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| ParseError::Syntax {
                offset: start,
                expected: vec!["number"],
            })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match name {
            "x" => return Ok(Expr::X),
            "pi" => return Ok(Expr::Const(Constant::Pi)),
            "e" => return Ok(Expr::Const(Constant::E)),
            _ => {}
        }
        let Some(f) = Func::from_name(name) else {
            return Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            });
        };
        if !self.eat(b'(') {
            return Err(self.syntax(&["'('"]));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.syntax(&["operator", "')'"]));
        }
        Ok(Expr::Call(f, Box::new(arg)))
    }
}

// Binding strength used by the printer; atoms are 5.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        Expr::Num(v) if v.is_sign_negative() => 3,
        _ => 5,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "-{}", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => f.write_str("x"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_at(f, a, 3)
            }
            Expr::Bin(op, a, b) => {
                let (l, r) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                write_at(f, a, l)?;
                match op {
                    BinOp::Pow => write!(f, "^")?,
                    _ => write!(f, " {} ", op.symbol())?,
                }
                write_at(f, b, r)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Polygamma(n, a) => write!(f, "polygamma({n}, {a})"),
        }
    }
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(w) if *w == v)
}

// Constructors that fold the trivial cases produced by the chain rule.
fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if is_num(&b, 0.0) => a,
        (a, b) if is_num(&a, 0.0) => b,
        (a, Expr::Neg(b)) => Expr::Bin(BinOp::Sub, Box::new(a), b),
        (a, b) => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if is_num(&b, 0.0) => a,
        (a, b) if is_num(&a, 0.0) => neg(b),
        (a, b) => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if is_num(&a, 0.0) || is_num(&b, 0.0) => num(0.0),
        (a, b) if is_num(&a, 1.0) => b,
        (a, b) if is_num(&b, 1.0) => a,
        (Expr::Neg(a), b) => neg(mul(*a, b)),
        (a, Expr::Neg(b)) => neg(mul(a, *b)),
        (a, b) => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if is_num(&a, 0.0) => num(0.0),
        (a, b) if is_num(&b, 1.0) => a,
        (a, b) => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        return a;
    }
    Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Neg(inner) => *inner,
        a if is_num(&a, 0.0) => a,
        a => Expr::Neg(Box::new(a)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl Expr {
    /// True when `x` does not occur.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::X => false,
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Polygamma(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// d/dx of the expression.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Const(_) => num(0.0),
            Expr::X => num(1.0),
            Expr::Neg(a) => neg(a.derivative()),
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.as_ref().clone(), b.as_ref().clone());
                let (du, dv) = (a.derivative(), b.derivative());
                match op {
                    BinOp::Add => add(du, dv),
                    BinOp::Sub => sub(du, dv),
                    BinOp::Mul => add(mul(du, v), mul(u, dv)),
                    BinOp::Div => div(sub(mul(du, v.clone()), mul(u, dv)), pow(v, num(2.0))),
                    BinOp::Pow if b.is_constant() => {
                        let lowered = match v {
                            Expr::Num(n) => num(n - 1.0),
                            v => sub(v, num(1.0)),
                        };
                        mul(mul(b.as_ref().clone(), pow(u, lowered)), du)
                    }
                    BinOp::Pow if a.is_constant() => mul(mul(self.clone(), call(Func::Ln, u)), dv),
                    // u^v (v' ln u + v u'/u)
                    BinOp::Pow => mul(
                        self.clone(),
                        add(mul(dv, call(Func::Ln, u.clone())), div(mul(v, du), u)),
                    ),
                }
            }
            Expr::Call(f, a) => {
                let u = a.as_ref().clone();
                let du = a.derivative();
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Exp => self.clone(),
                    Func::Ln => return div(du, u),
                    Func::Sqrt => return div(du, mul(num(2.0), self.clone())),
                    Func::Abs => call(Func::Sign, u),
                    Func::Gamma => mul(self.clone(), Expr::Polygamma(0, Box::new(u))),
                    Func::Sign => return num(0.0),
                };
                mul(outer, du)
            }
            Expr::Polygamma(n, a) => mul(Expr::Polygamma(n + 1, a.clone()), a.derivative()),
        }
    }

    /// Value at `x`; domain violations and non-finite intermediate results
    /// are errors.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let fail = |what: String| EvalError { x, what };
        let finite = |v: f64, what: &dyn Fn() -> String| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(fail(what()))
            }
        };
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::X => Ok(x),
            Expr::Const(Constant::Pi) => Ok(std::f64::consts::PI),
            Expr::Const(Constant::E) => Ok(std::f64::consts::E),
            Expr::Neg(a) => Ok(-a.eval(x)?),
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.eval(x)?, b.eval(x)?);
                let r = match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div if v == 0.0 => {
                        return Err(fail(format!("division by zero in {self}")))
                    }
                    BinOp::Div => u / v,
                    BinOp::Pow => u.powf(v),
                };
                finite(r, &|| format!("{self} is not a finite real"))
            }
            Expr::Call(f, a) => {
                let u = a.eval(x)?;
                let r = match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Ln if u <= 0.0 => {
                        return Err(fail(format!("ln of non-positive value {u}")))
                    }
                    Func::Ln => u.ln(),
                    Func::Sqrt if u < 0.0 => {
                        return Err(fail(format!("sqrt of negative value {u}")))
                    }
                    Func::Sqrt => u.sqrt(),
                    Func::Abs => u.abs(),
                    Func::Gamma => gamma_fn(u).map_err(|e| fail(e.to_string()))?,
                    Func::Sign if u == 0.0 => 0.0,
                    Func::Sign => u.signum(),
                };
                finite(r, &|| format!("{self} is not a finite real"))
            }
            Expr::Polygamma(n, a) => polygamma(*n, a.eval(x)?).map_err(|e| fail(e.to_string())),
        }
    }

    /// The expression on `[a, b]` with its symbolic derivative attached.
    /// Failed evaluations become NaN, which the quadratures report.
    pub fn to_function(&self, a: f64, b: f64) -> CoreResult<RealFunction> {
        let f = self.clone();
        let df = self.derivative();
        let label = self.to_string();
        RealFunction::with_derivative(
            a,
            b,
            move |t| f.eval(t).unwrap_or(f64::NAN),
            move |t| df.eval(t).unwrap_or(f64::NAN),
        )
        .map(|g| g.labeled(label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(s: &str, x: f64) -> f64 {
        parse_expr(s).unwrap().eval(x).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(at("x^2 + 1", 2.0), 5.0);
        assert_eq!(at("2+3*4", 0.0), 14.0);
        assert!((at("sin(pi/2)", 0.0) - 1.0).abs() < 1e-16);
        assert_eq!(at("2^3^2", 0.0), 512.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(at("-2^2", 0.0), -4.0);
        assert_eq!(at("2^-1", 0.0), 0.5);
        assert_eq!(at("-x*3", 2.0), -6.0);
        assert_eq!(at("--x", 2.0), 2.0);
        assert_eq!(at("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(at("8 / 4 / 2", 0.0), 1.0);
    }

    #[test]
    fn numbers_and_constants() {
        assert_eq!(at("1.5e2", 0.0), 150.0);
        assert_eq!(at(".25", 0.0), 0.25);
        assert_eq!(at("2E-1", 0.0), 0.2);
        assert!((at("e", 0.0) - std::f64::consts::E).abs() == 0.0);
        assert!((at("gamma(5)", 0.0) - 24.0).abs() < 1e-12);
        // `2e` is a number followed by the constant, which is not an operator
        assert!(matches!(
            parse_expr("2e"),
            Err(ParseError::Syntax { offset: 1, .. })
        ));
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_expr("x + * 2") {
            Err(ParseError::Syntax { offset, expected }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"number"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse_expr("2 * foo(x)"),
            Err(ParseError::UnknownIdentifier {
                name: "foo".into(),
                offset: 4
            })
        );
        assert!(matches!(
            parse_expr("sin x"),
            Err(ParseError::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            parse_expr("(x + 1"),
            Err(ParseError::Syntax { offset: 6, .. })
        ));
        assert!(matches!(
            parse_expr("x)"),
            Err(ParseError::Syntax { offset: 1, .. })
        ));
        assert_eq!(parse_expr("  "), Err(ParseError::Empty));
    }

    #[test]
    fn domain_violations_are_reported() {
        assert!(parse_expr("ln(x)").unwrap().eval(-1.0).is_err());
        assert!(parse_expr("sqrt(x - 2)").unwrap().eval(1.0).is_err());
        assert!(parse_expr("1/x").unwrap().eval(0.0).is_err());
        assert!(parse_expr("gamma(x)").unwrap().eval(-2.0).is_err());
        assert!(parse_expr("exp(x)").unwrap().eval(1000.0).is_err());
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "-2^2",
            "(-2)^2",
            "2^3^2",
            "(2^3)^2",
            "1 - (2 - 3)",
            "x / (2 * x)",
            "-(x + 1)",
            "x^-x",
            "sin(x)^2",
        ] {
            let e = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{s} printed as {e}");
        }
    }

    #[test]
    fn derivatives() {
        let d = |s: &str, x: f64| parse_expr(s).unwrap().derivative().eval(x).unwrap();
        assert_eq!(d("x^3", 2.0), 12.0);
        assert!(
            (d("sin(x) * exp(x)", 0.5) - 0.5f64.exp() * (0.5f64.sin() + 0.5f64.cos())).abs()
                < 1e-15
        );
        assert!((d("x^x", 2.0) - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-14);
        assert!((d("2^x", 1.0) - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(d("abs(x)", -3.0), -1.0);
        assert_eq!(d("abs(x)", 0.0), 0.0);
        // Γ'(1) = -γ
        assert!((d("gamma(x)", 1.0) + 0.577_215_664_901_532_9).abs() < 1e-14);
        assert_eq!(parse_expr("x^2").unwrap().derivative().to_string(), "2 * x");
        assert_eq!(parse_expr("3").unwrap().derivative(), Expr::Num(0.0));
    }
}
