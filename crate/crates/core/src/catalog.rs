//! Benchmark problems with singular potentials at `x = -1`.

use alloc::format;

use crate::basis::{BoundaryCondition, ProblemSpec};
use crate::expansion::parse;

fn build(f: &str, g: &str, gamma: f64, left: (f64, f64), right: (f64, f64)) -> ProblemSpec {
    ProblemSpec {
        f: parse(f).expect("catalog expression"),
        g: parse(g).expect("catalog expression"),
        gamma,
        bc_left: BoundaryCondition::new(left.0, left.1).expect("catalog condition"),
        bc_right: BoundaryCondition::new(right.0, right.1).expect("catalog condition"),
    }
}

/// `q = cos(2πx) + 10(2 − e^{−x})/(1+x)^γ`, `y(±1) = ±y'(±1)`.
pub fn cosine_exponential(gamma: f64) -> ProblemSpec {
    build("cos(2*pi*x)", "10*(2-exp(-x))", gamma, (1.0, 1.0), (1.0, -1.0))
}

/// `q = 2x² + 5/(((1+x)²+1)(1+x)^γ)`, `y'(-1) = 0`, `y(1) = 0`.
pub fn quadratic_rational(gamma: f64) -> ProblemSpec {
    build("2*x^2", "5/((1+x)^2+1)", gamma, (0.0, 1.0), (1.0, 0.0))
}

/// `q = 3(x cos 2πx)²/(1+x)^γ`, `y(-1) = 0`, `y'(1) = 0`.
pub fn squared_cosine(gamma: f64) -> ProblemSpec {
    build("0", "3*(x*cos(2*pi*x))^2", gamma, (1.0, 0.0), (0.0, 1.0))
}

/// `q = 2 cosh x + (2+x)/((1+3x²)(1+x)^γ)`, `y(-1) = 0`, `y(1) = y'(1)`.
pub fn cosh_rational(gamma: f64) -> ProblemSpec {
    build("2*cosh(x)", "(2+x)/(1+3*x^2)", gamma, (1.0, 0.0), (1.0, -1.0))
}

/// `q = log(3+x) + α cos(4πx)/(1+x)²`, `y(±1) = 0`.
pub fn log_cosine(alpha: f64) -> ProblemSpec {
    build("log(3+x)", &format!("{alpha:?}*cos(4*pi*x)"), 2.0, (1.0, 0.0), (1.0, 0.0))
}

/// `q = 1/(1+25x²) + α(1 + sinh(1+x))/(1+x)²`, `y(-1) = 0`, `y(1) = 2y'(1)`.
pub fn runge_sinh(alpha: f64) -> ProblemSpec {
    build("1/(1+25*x^2)", &format!("{alpha:?}*(1+sinh(1+x))"), 2.0, (1.0, 0.0), (1.0, -2.0))
}

/// `q = c/(1+x)^γ` with the given boundary pair (Bessel family at `γ = 2`).
pub fn pure_power(c: f64, gamma: f64, left: (f64, f64), right: (f64, f64)) -> ProblemSpec {
    build("0", &format!("{c:?}"), gamma, left, right)
}

/// `q ≡ 0`.
pub fn free(left: (f64, f64), right: (f64, f64)) -> ProblemSpec {
    build("0", "0", 0.0, left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::EndpointClass;

    #[test]
    fn classifications() {
        assert_eq!(cosine_exponential(0.25).classify(), EndpointClass::WeaklyRegular);
        assert_eq!(log_cosine(0.5).classify(), EndpointClass::LimitCircleNonOscillatory);
        assert_eq!(log_cosine(1.0).classify(), EndpointClass::LimitPointNonOscillatory);
        assert!((runge_sinh(0.75).g_left() - 0.75).abs() < 1e-15);
        for p in [
            cosine_exponential(0.5),
            quadratic_rational(0.4),
            squared_cosine(1.5),
            cosh_rational(1.65),
            log_cosine(0.125),
            runge_sinh(1.25),
        ] {
            p.validate().unwrap();
        }
    }
}
