//! Expression language for `f` and `g`, Legendre projection, and functions of
//! the tridiagonal multiplication operators.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::SlpError;
use crate::math;
use crate::polyops::{self, QuadratureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => math::sin(v),
            Func::Cos => math::cos(v),
            Func::Tan => math::tan(v),
            Func::Exp => math::exp(v),
            Func::Log => math::ln(v),
            Func::Sqrt => math::sqrt(v),
            Func::Sinh => math::sinh(v),
            Func::Cosh => math::cosh(v),
            Func::Abs => math::abs(v),
        }
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

/// Abstract syntax tree of a real function of `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionExpr {
    Number(f64),
    Pi,
    E,
    X,
    Neg(Box<FunctionExpr>),
    Binary(BinOp, Box<FunctionExpr>, Box<FunctionExpr>),
    Call(Func, Box<FunctionExpr>),
}

impl FunctionExpr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionExpr::Number(v) => *v,
            FunctionExpr::Pi => core::f64::consts::PI,
            FunctionExpr::E => core::f64::consts::E,
            FunctionExpr::X => x,
            FunctionExpr::Neg(a) => -a.eval(x),
            FunctionExpr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            FunctionExpr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    pub fn constant(v: f64) -> Self {
        FunctionExpr::Number(v)
    }

    /// True for the literal `0` (after stripping negations).
    pub fn is_literal_zero(&self) -> bool {
        match self {
            FunctionExpr::Number(v) => *v == 0.0,
            FunctionExpr::Neg(a) => a.is_literal_zero(),
            _ => false,
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b == math::round(b) && math::abs(b) <= 64.0 {
        let mut n = b as i32;
        let mut base = if n < 0 { 1.0 / a } else { a };
        n = n.abs();
        let mut acc = 1.0;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        acc
    } else {
        math::powf(a, b)
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionExpr::Number(v) => write!(f, "{v}"),
            FunctionExpr::Pi => f.write_str("pi"),
            FunctionExpr::E => f.write_str("e"),
            FunctionExpr::X => f.write_str("x"),
            FunctionExpr::Neg(a) => write!(f, "(-{a})"),
            FunctionExpr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            FunctionExpr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl core::str::FromStr for FunctionExpr {
    type Err = SlpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parse an expression in `x`.
///
/// Grammar: `+ - * /`, right-associative `^` binding tighter than unary minus,
/// the functions `sin cos tan exp log sqrt sinh cosh abs`, constants `pi`, `e`.
pub fn parse(text: &str) -> Result<FunctionExpr, SlpError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(SlpError::Syntax {
            offset: 0,
            message: "empty expression",
        });
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &'static str) -> SlpError {
        SlpError::Syntax {
            offset: self.pos,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<FunctionExpr, SlpError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = FunctionExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<FunctionExpr, SlpError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = FunctionExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<FunctionExpr, SlpError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(FunctionExpr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<FunctionExpr, SlpError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(FunctionExpr::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<FunctionExpr, SlpError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("expected a number, name or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<FunctionExpr, SlpError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let after = self.src.get(self.pos + 1).copied();
            let after2 = self.src.get(self.pos + 2).copied();
            let has_exp = match after {
                Some(c) if c.is_ascii_digit() => true,
                Some(b'+' | b'-') => after2.is_some_and(|c| c.is_ascii_digit()),
                _ => false,
            };
            if has_exp {
                self.pos += 2;
                digits(self);
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let v: f64 = text.parse().map_err(|_| SlpError::Syntax {
            offset: start,
            message: "malformed number",
        })?;
        if !v.is_finite() {
            return Err(SlpError::Syntax {
                offset: start,
                message: "number out of range",
            });
        }
        Ok(FunctionExpr::Number(v))
    }

    fn identifier(&mut self) -> Result<FunctionExpr, SlpError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match name {
            "x" => return Ok(FunctionExpr::X),
            "pi" => return Ok(FunctionExpr::Pi),
            "e" => return Ok(FunctionExpr::E),
            _ => {}
        }
        let Some(func) = Func::from_name(name) else {
            return Err(SlpError::UnknownIdentifier(name.to_string()));
        };
        if self.peek() != Some(b'(') {
            return Err(self.error("expected `(` after function name"));
        }
        self.pos += 1;
        let arg = self.expr()?;
        if self.peek() != Some(b')') {
            return Err(self.error("expected `)`"));
        }
        self.pos += 1;
        Ok(FunctionExpr::Call(func, Box::new(arg)))
    }
}

/// Truncated Legendre expansion `Σ c_ℓ P_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSeries {
    pub coeffs: Vec<f64>,
    pub tol: f64,
}

impl LegendreSeries {
    pub fn new(coeffs: Vec<f64>, tol: f64) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { coeffs, tol }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Clenshaw for the Legendre recurrence.
        let n = self.coeffs.len();
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (0..n).rev() {
            let kf = k as f64;
            let alpha = (2.0 * kf + 1.0) / (kf + 1.0) * x;
            let beta = (kf + 1.0) / (kf + 2.0);
            let b0 = self.coeffs[k] + alpha * b1 - beta * b2;
            b2 = b1;
            b1 = b0;
        }
        b1
    }

    /// Sum of two series coefficientwise.
    pub fn add(&self, other: &LegendreSeries) -> LegendreSeries {
        let n = self.len().max(other.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + other.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        LegendreSeries::new(coeffs, self.tol.max(other.tol))
    }
}

const PROJECTION_START: usize = 32;
const PROJECTION_CAP: usize = 4096;

/// Legendre coefficients `c_ℓ = (2ℓ+1)/2 ∫ f P_ℓ` by Gauss–Legendre quadrature.
///
/// The node count doubles from 32 to 4096. Coefficients up to half the node
/// count are trusted. The series is cut where at least three trailing trusted
/// coefficients fall below `tol` times the scale `max(max|c_ℓ|, max|f|)`, with
/// the threshold raised to the rounding floor of the quadrature sums.
pub fn project_legendre(expr: &FunctionExpr, tol: f64) -> Result<LegendreSeries, SlpError> {
    project_fn(|x| expr.eval(x), tol).map_err(|e| match e {
        SlpError::NoDecay(_) => SlpError::NoDecay(expr.to_string()),
        other => other,
    })
}

/// [`project_legendre`] for an arbitrary closure.
pub fn project_fn(f: impl Fn(f64) -> f64, tol: f64) -> Result<LegendreSeries, SlpError> {
    let tol = tol.max(1e-16);
    let mut n = PROJECTION_START;
    while n <= PROJECTION_CAP {
        let rule = polyops::gauss_nodes(n, QuadratureKind::Legendre)?;
        let trusted = n / 2;
        let mut coeffs = vec![0.0; trusted];
        let mut p = vec![0.0; trusted];
        let mut fmax: f64 = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let fx = f(x);
            if !fx.is_finite() {
                return Err(SlpError::NonFinite(x));
            }
            fmax = fmax.max(math::abs(fx));
            polyops::legendre_all(x, &mut p);
            let wf = w * fx;
            for (c, pj) in coeffs.iter_mut().zip(&p) {
                *c += wf * pj;
            }
        }
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c *= (2.0 * j as f64 + 1.0) / 2.0;
        }
        let cmax = coeffs.iter().fold(0.0f64, |m, c| m.max(math::abs(*c)));
        let scale = cmax.max(fmax);
        if scale == 0.0 {
            return Ok(LegendreSeries::new(vec![0.0], tol));
        }
        let threshold = |j: usize| {
            let floor = 8.0 * f64::EPSILON * math::sqrt(2.0 * j as f64 + 1.0);
            tol.max(floor) * scale
        };
        let mut cut = trusted;
        while cut > 0 && math::abs(coeffs[cut - 1]) < threshold(cut - 1) {
            cut -= 1;
        }
        if trusted - cut >= 3 {
            coeffs.truncate(cut.max(1));
            return Ok(LegendreSeries::new(coeffs, tol));
        }
        n *= 2;
    }
    Err(SlpError::NoDecay(String::new()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Multiplication by `x` in the Legendre basis.
    Legendre,
    /// Multiplication by `x` in the Jacobi `P^{(0,1)}` basis.
    Jacobi01,
}

/// Finite section of the multiplication-by-`x` operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TridiagonalOperator {
    pub kind: OperatorKind,
    pub size: usize,
}

impl TridiagonalOperator {
    pub fn new(kind: OperatorKind, size: usize) -> Self {
        Self { kind, size }
    }

    /// `(h_{m,m-1}, h_{m,m}, h_{m,m+1})`.
    #[inline]
    pub fn row(&self, m: usize) -> (f64, f64, f64) {
        match self.kind {
            OperatorKind::Legendre => {
                let mf = m as f64;
                (mf / (2.0 * mf + 1.0), 0.0, (mf + 1.0) / (2.0 * mf + 1.0))
            }
            OperatorKind::Jacobi01 => polyops::jacobi01_recurrence(m),
        }
    }

    /// `out = op · v` on the first `len` entries, treating `v` as zero beyond `len`.
    pub fn apply(&self, v: &[f64], out: &mut [f64], len: usize) {
        for m in 0..len {
            let (lo, mid, hi) = self.row(m);
            let mut s = mid * v[m];
            if m > 0 {
                s += lo * v[m - 1];
            }
            if m + 1 < len {
                s += hi * v[m + 1];
            }
            out[m] = s;
        }
    }
}

/// First `count` entries of `g(op) v` by the Legendre recurrence in `op`.
pub fn apply_operator_function(
    series: &LegendreSeries,
    op: &TridiagonalOperator,
    v: &[f64],
    count: usize,
) -> Result<Vec<f64>, SlpError> {
    let needed = count + series.len() + 2;
    if op.size < needed || v.len() < op.size {
        return Err(SlpError::SizeTooSmall {
            size: op.size.min(v.len()),
            needed,
        });
    }
    let size = op.size;
    let mut prev = vec![0.0; size];
    let mut cur = v[..size].to_vec();
    let mut next = vec![0.0; size];
    let mut acc: Vec<f64> = cur.iter().map(|w| series.coeffs[0] * w).collect();
    for l in 0..series.len() - 1 {
        let lf = l as f64;
        op.apply(&cur, &mut next, size);
        let a = (2.0 * lf + 1.0) / (lf + 1.0);
        let b = lf / (lf + 1.0);
        for i in 0..size {
            next[i] = a * next[i] - b * prev[i];
        }
        let c = series.coeffs[l + 1];
        if c != 0.0 {
            for i in 0..size {
                acc[i] += c * next[i];
            }
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
    }
    acc.truncate(count);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        assert!((parse("cos(2*pi*x)").unwrap().eval(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(parse("10*(2-exp(-x))").unwrap().eval(0.0), 10.0);
        assert_eq!(
            parse("2+*x"),
            Err(SlpError::Syntax {
                offset: 2,
                message: "expected a number, name or `(`"
            })
        );
        assert!(matches!(parse("foo(x)"), Err(SlpError::UnknownIdentifier(n)) if n == "foo"));
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-2^2").unwrap().eval(0.0), -4.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0), 512.0);
        assert_eq!(parse("2^-1").unwrap().eval(0.0), 0.5);
        assert_eq!(parse("1-2-3").unwrap().eval(0.0), -4.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0), 1.0);
        assert_eq!(parse("1.5e2*x").unwrap().eval(2.0), 300.0);
        assert!((parse("2*e").unwrap().eval(0.0) - 2.0 * core::f64::consts::E).abs() < 1e-15);
        assert!(parse("2e").is_err());
        assert!(parse("(x").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "cos(2*pi*x)",
            "10*(2-exp(-x))",
            "5/((1+x)^2+1)",
            "-x^2 + 0.1*sinh(1+x)/3",
            "abs(x)-sqrt(2)*log(3+x)",
        ] {
            let e = parse(s).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{s}");
        }
    }

    #[test]
    fn projection_examples() {
        let s = project_legendre(&parse("3").unwrap(), 1e-15).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.coeffs[0] - 3.0).abs() < 1e-14);
        let s = project_legendre(&parse("x").unwrap(), 1e-15).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.coeffs[0].abs() < 1e-15 && (s.coeffs[1] - 1.0).abs() < 1e-14);
        let s = project_legendre(&parse("cos(2*pi*x)").unwrap(), 1e-15).unwrap();
        assert!((22..=36).contains(&s.len()), "len {}", s.len());
        assert!((s.eval(0.5) + 1.0).abs() < 1e-13);
    }

    #[test]
    fn projection_of_p7() {
        let s = project_fn(|x| polyops::legendre_eval(7, x), 1e-15).unwrap();
        assert_eq!(s.len(), 8);
        for (j, c) in s.coeffs.iter().enumerate() {
            let want = if j == 7 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_samples_match() {
        for text in [
            "1/(1+25*x^2)",
            "log(3+x)",
            "10*(2-exp(-x))",
            "3*(x*cos(2*pi*x))^2",
            "(2+x)/(1+3*x^2)",
            "1+sinh(1+x)",
        ] {
            let e = parse(text).unwrap();
            let s = project_legendre(&e, 1e-15).unwrap();
            for i in 0..17 {
                let x = -1.0 + 2.0 * i as f64 / 16.0;
                let d = (s.eval(x) - e.eval(x)).abs();
                assert!(d < 1e-13 * (1.0 + e.eval(x).abs()), "{text} x={x} d={d}");
            }
        }
    }

    #[test]
    fn projection_rejects_non_analytic() {
        let e = parse("abs(x)").unwrap();
        assert!(matches!(project_legendre(&e, 1e-15), Err(SlpError::NoDecay(_))));
        let e = parse("1/x").unwrap();
        assert!(project_legendre(&e, 1e-15).is_err());
    }

    #[test]
    fn operator_function_examples() {
        let op = TridiagonalOperator::new(OperatorKind::Legendre, 12);
        let v: Vec<f64> = (0..12).map(|i| i as f64 * 0.5 - 1.0).collect();
        let one = LegendreSeries::new(vec![1.0], 1e-15);
        assert_eq!(apply_operator_function(&one, &op, &v, 5).unwrap(), v[..5].to_vec());
        let mut e0 = vec![0.0; 12];
        e0[0] = 1.0;
        let xs = LegendreSeries::new(vec![0.0, 1.0], 1e-15);
        let out = apply_operator_function(&xs, &op, &e0, 4).unwrap();
        assert_eq!(out, vec![0.0, 1.0 / 3.0, 0.0, 0.0]);
        assert!(apply_operator_function(&xs, &op, &e0, 9).is_err());
    }

    #[test]
    fn operator_function_matches_quadrature() {
        let beta = -0.25;
        let count = 20;
        let g = LegendreSeries::new(
            project_legendre(&parse("2-exp(-x)").unwrap(), 1e-15).unwrap().coeffs,
            1e-15,
        );
        let size = count + g.len() + 8;
        let rule = polyops::gauss_nodes(256, QuadratureKind::Jacobi { beta }).unwrap();
        let moments: Vec<f64> = (0..size)
            .map(|m| rule.integrate(|x| polyops::legendre_eval(m, x)))
            .collect();
        let op = TridiagonalOperator::new(OperatorKind::Legendre, size);
        let out = apply_operator_function(&g, &op, &moments, count).unwrap();
        for (m, got) in out.iter().enumerate() {
            let want = rule.integrate(|x| (2.0 - (-x).exp()) * polyops::legendre_eval(m, x));
            assert!((got - want).abs() < 1e-11, "m={m}");
        }
    }

    fn dense(op: &TridiagonalOperator) -> Vec<Vec<f64>> {
        let n = op.size;
        let mut a = vec![vec![0.0; n]; n];
        for m in 0..n {
            let (lo, mid, hi) = op.row(m);
            if m > 0 {
                a[m][m - 1] = lo;
            }
            a[m][m] = mid;
            if m + 1 < n {
                a[m][m + 1] = hi;
            }
        }
        a
    }

    fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
    }

    proptest! {
        #[test]
        fn polynomial_functions_match_matrix_powers(
            coeffs in proptest::collection::vec(-2.0f64..2.0, 1..=5),
            v in proptest::collection::vec(-1.0f64..1.0, 24),
            jacobi in any::<bool>(),
            count in 1usize..=16,
        ) {
            let kind = if jacobi { OperatorKind::Jacobi01 } else { OperatorKind::Legendre };
            let series = LegendreSeries::new(coeffs.clone(), 1e-15);
            let size = count + series.len() + 2;
            let op = TridiagonalOperator::new(kind, size);
            let got = apply_operator_function(&series, &op, &v, count).unwrap();
            // Monomial expansion of Σ c_ℓ P_ℓ applied via explicit matrix powers.
            let big = TridiagonalOperator::new(kind, 24);
            let a = dense(&big);
            let mut powers = vec![v.clone()];
            for _ in 1..coeffs.len() {
                let last = powers.last().unwrap().clone();
                powers.push(matvec(&a, &last));
            }
            let mut want = [0.0; 24];
            for (l, c) in coeffs.iter().enumerate() {
                // monomial coefficients of P_l
                let mut p_prev = vec![1.0];
                let mut p_cur = vec![0.0, 1.0];
                let pl = if l == 0 { p_prev.clone() } else {
                    for k in 1..l {
                        let kf = k as f64;
                        let mut nxt = vec![0.0; k + 2];
                        for (i, c) in p_cur.iter().enumerate() { nxt[i + 1] += (2.0 * kf + 1.0) / (kf + 1.0) * c; }
                        for (i, c) in p_prev.iter().enumerate() { nxt[i] -= kf / (kf + 1.0) * c; }
                        p_prev = p_cur;
                        p_cur = nxt;
                    }
                    p_cur.clone()
                };
                for (d, m) in pl.iter().enumerate() {
                    for i in 0..24 { want[i] += c * m * powers[d][i]; }
                }
            }
            for i in 0..count {
                prop_assert!((got[i] - want[i]).abs() < 1e-11, "i={} {} {}", i, got[i], want[i]);
            }
        }

        #[test]
        fn operator_function_is_linear(
            a in proptest::collection::vec(-1.0f64..1.0, 30),
            b in proptest::collection::vec(-1.0f64..1.0, 30),
            s in -3.0f64..3.0,
        ) {
            let series = LegendreSeries::new(vec![0.3, -1.0, 0.25, 0.1], 1e-15);
            let op = TridiagonalOperator::new(OperatorKind::Legendre, 30);
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            let fa = apply_operator_function(&series, &op, &a, 10).unwrap();
            let fb = apply_operator_function(&series, &op, &b, 10).unwrap();
            let fc = apply_operator_function(&series, &op, &combo, 10).unwrap();
            for i in 0..10 {
                prop_assert!((fc[i] - fa[i] - s * fb[i]).abs() < 1e-12);
            }
        }
    }
}
