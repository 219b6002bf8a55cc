//! Boundary-adapted basis `R_n = ξ_n P_n + η_n P_{n+1} + θ_n P_{n+2}` and
//! the classification of the left endpoint.

use alloc::format;
use alloc::vec::Vec;

use crate::error::SlpError;
use crate::expansion::FunctionExpr;
use crate::math;
use crate::polyops::{self, Side};

/// Separated condition `α y + β y' = 0` at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub alpha: f64,
    pub beta: f64,
}

impl BoundaryCondition {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, SlpError> {
        if !(alpha.is_finite() && beta.is_finite()) || (alpha == 0.0 && beta == 0.0) {
            return Err(SlpError::InvalidArgument(
                "boundary condition needs a nonzero (alpha, beta) pair",
            ));
        }
        Ok(Self { alpha, beta })
    }

    pub const DIRICHLET: Self = Self {
        alpha: 1.0,
        beta: 0.0,
    };
    pub const NEUMANN: Self = Self {
        alpha: 0.0,
        beta: 1.0,
    };

    pub fn is_dirichlet(&self) -> bool {
        self.beta == 0.0
    }

    pub fn is_neumann(&self) -> bool {
        self.alpha == 0.0
    }
}

/// Weyl-type classification of the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointClass {
    Regular,
    WeaklyRegular,
    LimitCircleNonOscillatory,
    LimitCircleOscillatory,
    LimitPointNonOscillatory,
}

impl EndpointClass {
    pub fn is_oscillatory(self) -> bool {
        self == EndpointClass::LimitCircleOscillatory
    }

    pub fn label(self) -> &'static str {
        match self {
            EndpointClass::Regular => "regular",
            EndpointClass::WeaklyRegular => "weakly-regular",
            EndpointClass::LimitCircleNonOscillatory => "LC-nonoscillatory",
            EndpointClass::LimitCircleOscillatory => "LC-oscillatory",
            EndpointClass::LimitPointNonOscillatory => "LP-nonoscillatory",
        }
    }
}

/// Classify `x = -1` for `q = f + g/(1+x)^γ` given `g(-1)`.
pub fn classify_endpoint(gamma: f64, g_left: f64) -> EndpointClass {
    if gamma == 0.0 || g_left == 0.0 {
        EndpointClass::Regular
    } else if gamma < 1.0 {
        EndpointClass::WeaklyRegular
    } else if gamma < 2.0 {
        EndpointClass::LimitCircleNonOscillatory
    } else if gamma == 2.0 {
        if g_left < -0.25 {
            EndpointClass::LimitCircleOscillatory
        } else if g_left < 0.75 {
            EndpointClass::LimitCircleNonOscillatory
        } else {
            EndpointClass::LimitPointNonOscillatory
        }
    } else if g_left < 0.0 {
        EndpointClass::LimitCircleOscillatory
    } else {
        EndpointClass::LimitPointNonOscillatory
    }
}

/// A Sturm–Liouville problem on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub f: FunctionExpr,
    pub g: FunctionExpr,
    pub gamma: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
}

impl ProblemSpec {
    pub fn g_left(&self) -> f64 {
        self.g.eval(-1.0)
    }

    pub fn classify(&self) -> EndpointClass {
        classify_endpoint(self.gamma, self.g_left())
    }

    /// Check the problem lies in the supported family.
    pub fn validate(&self) -> Result<(), SlpError> {
        if !(0.0..=2.0).contains(&self.gamma) {
            return Err(SlpError::Unsupported(format!(
                "exponent {} outside [0, 2]",
                self.gamma
            )));
        }
        let class = self.classify();
        if class.is_oscillatory() {
            return Err(SlpError::Unsupported(format!(
                "oscillatory left endpoint (gamma = {}, g(-1) = {})",
                self.gamma,
                self.g_left()
            )));
        }
        if self.gamma >= 1.0 && !self.g.is_literal_zero() && !self.bc_left.is_dirichlet() {
            return Err(SlpError::Unsupported(format!(
                "exponent {} >= 1 requires a Dirichlet condition at x = -1",
                self.gamma
            )));
        }
        let gl = self.g_left();
        if !gl.is_finite() || !self.f.eval(-1.0).is_finite() {
            return Err(SlpError::Unsupported("f or g not finite at x = -1".into()));
        }
        Ok(())
    }
}

/// `α_a β_b + α_b β_a == 0`.
pub fn is_symmetric_pair(left: &BoundaryCondition, right: &BoundaryCondition) -> bool {
    left.alpha * right.beta + right.alpha * left.beta == 0.0
}

/// Normalized `(ξ_n, η_n, θ_n)` for the given boundary pair.
pub fn basis_coefficients(
    n: usize,
    left: &BoundaryCondition,
    right: &BoundaryCondition,
) -> Result<[f64; 3], SlpError> {
    let nf = n as f64;
    let (aa, ba, ab, bb) = (left.alpha, left.beta, right.alpha, right.beta);
    let raw = if is_symmetric_pair(left, right) {
        [
            -(aa - (nf + 2.0) * (nf + 3.0) / 2.0 * ba),
            0.0,
            aa - nf * (nf + 1.0) / 2.0 * ba,
        ]
    } else {
        let cross = aa * bb - ab * ba;
        [
            2.0 * aa * ab
                + (nf + 2.0) * (nf + 2.0) * (cross - (nf + 1.0) * (nf + 3.0) / 2.0 * ba * bb),
            (2.0 * nf + 3.0) * (aa * bb + ab * ba),
            -(2.0 * aa * ab + (nf + 1.0) * (nf + 1.0) * (cross - nf * (nf + 2.0) / 2.0 * ba * bb)),
        ]
    };
    let scale = raw.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    if scale == 0.0 || !scale.is_finite() {
        return Err(SlpError::InvalidArgument("degenerate basis triple"));
    }
    let lead = raw.iter().copied().find(|v| *v != 0.0).unwrap_or(1.0);
    let scale = if lead < 0.0 { -scale } else { scale };
    Ok(raw.map(|v| v / scale))
}

/// The first `count` basis triples of a boundary pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisCoefficients {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub symmetric: bool,
    triples: Vec<[f64; 3]>,
}

impl BasisCoefficients {
    pub fn new(
        left: BoundaryCondition,
        right: BoundaryCondition,
        count: usize,
    ) -> Result<Self, SlpError> {
        let triples = (0..count)
            .map(|n| basis_coefficients(n, &left, &right))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            left,
            right,
            symmetric: is_symmetric_pair(&left, &right),
            triples,
        })
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    #[inline]
    pub fn triple(&self, n: usize) -> [f64; 3] {
        self.triples[n]
    }

    pub fn left_dirichlet(&self) -> bool {
        self.left.is_dirichlet()
    }

    /// `R_n(x)` by direct Legendre evaluation.
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        let [xi, eta, theta] = self.triples[n];
        xi * polyops::legendre_eval(n, x)
            + eta * polyops::legendre_eval(n + 1, x)
            + theta * polyops::legendre_eval(n + 2, x)
    }

    /// `(R_n(-1), R'_n(-1), U_n(-1))`; the last is `None` unless the left
    /// condition is Dirichlet.
    pub fn left_traces(&self, n: usize) -> (f64, f64, Option<f64>) {
        let [xi, eta, theta] = self.triples[n];
        let value = xi * polyops::legendre_endpoint(n, Side::Left)
            + eta * polyops::legendre_endpoint(n + 1, Side::Left)
            + theta * polyops::legendre_endpoint(n + 2, Side::Left);
        let slope = xi * polyops::legendre_endpoint_derivative(n, Side::Left)
            + eta * polyops::legendre_endpoint_derivative(n + 1, Side::Left)
            + theta * polyops::legendre_endpoint_derivative(n + 2, Side::Left);
        let u = self.left_dirichlet().then_some(slope);
        (value, slope, u)
    }

    /// `(R_n(1), R'_n(1))`.
    pub fn right_traces(&self, n: usize) -> (f64, f64) {
        let [xi, eta, theta] = self.triples[n];
        let value = xi + eta + theta;
        let slope = xi * polyops::legendre_endpoint_derivative(n, Side::Right)
            + eta * polyops::legendre_endpoint_derivative(n + 1, Side::Right)
            + theta * polyops::legendre_endpoint_derivative(n + 2, Side::Right);
        (value, slope)
    }

    /// Legendre coefficients (length `len + 2`) of `Σ ζ_n R_n`.
    pub fn to_legendre(&self, zeta: &[f64]) -> Vec<f64> {
        let mut c = alloc::vec![0.0; zeta.len() + 2];
        for (n, z) in zeta.iter().enumerate() {
            let [xi, eta, theta] = self.triples[n];
            c[n] += xi * z;
            c[n + 1] += eta * z;
            c[n + 2] += theta * z;
        }
        c
    }
}

/// Banded matrix whose column `n` holds up to three entries starting at row `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<[f64; 3]>,
}

impl ConversionMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j >= self.cols || i < j || i - j > 2 || i >= self.rows {
            0.0
        } else {
            self.columns[j][i - j]
        }
    }

    pub fn nonzeros(&self) -> usize {
        self.columns
            .iter()
            .map(|c| c.iter().filter(|v| **v != 0.0).count())
            .sum()
    }
}

/// `R_N` ((N+2)×N) and, for Dirichlet-left pairs, `R̃_N` ((N+1)×N).
pub fn build_conversion_matrices(
    n: usize,
    coeffs: &BasisCoefficients,
) -> Result<(ConversionMatrix, Option<ConversionMatrix>), SlpError> {
    if n == 0 || coeffs.len() < n {
        return Err(SlpError::InvalidArgument("conversion matrices need 1 <= N <= basis length"));
    }
    let r = ConversionMatrix {
        rows: n + 2,
        cols: n,
        columns: (0..n).map(|k| coeffs.triple(k)).collect(),
    };
    let rt = coeffs.left_dirichlet().then(|| ConversionMatrix {
        rows: n + 1,
        cols: n,
        columns: (0..n)
            .map(|k| {
                let [xi, _, theta] = coeffs.triple(k);
                [xi, theta, 0.0]
            })
            .collect(),
    });
    Ok((r, rt))
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: BoundaryCondition = BoundaryCondition::DIRICHLET;
    const N: BoundaryCondition = BoundaryCondition::NEUMANN;

    fn bc(a: f64, b: f64) -> BoundaryCondition {
        BoundaryCondition::new(a, b).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_endpoint(1.5, 2.0), EndpointClass::LimitCircleNonOscillatory);
        assert_eq!(classify_endpoint(2.0, 1.0), EndpointClass::LimitPointNonOscillatory);
        assert_eq!(classify_endpoint(2.0, -0.5), EndpointClass::LimitCircleOscillatory);
        assert_eq!(classify_endpoint(0.0, 3.0), EndpointClass::Regular);
        assert_eq!(classify_endpoint(0.5, 0.0), EndpointClass::Regular);
        assert_eq!(classify_endpoint(0.25, 20.0), EndpointClass::WeaklyRegular);
        assert_eq!(classify_endpoint(2.0, -0.25), EndpointClass::LimitCircleNonOscillatory);
        assert_eq!(classify_endpoint(2.0, 0.75), EndpointClass::LimitPointNonOscillatory);
        assert_eq!(classify_endpoint(2.5, -1.0), EndpointClass::LimitCircleOscillatory);
        assert_eq!(classify_endpoint(2.5, 1.0), EndpointClass::LimitPointNonOscillatory);
    }

    #[test]
    fn coefficient_examples() {
        for n in [0, 1, 7, 100] {
            assert_eq!(basis_coefficients(n, &D, &D).unwrap(), [1.0, 0.0, -1.0]);
        }
        let t = basis_coefficients(1, &N, &N).unwrap();
        assert_eq!(t[0], 1.0);
        assert_eq!(t[1], 0.0);
        assert!((t[2] + 1.0 / 6.0).abs() < 1e-15);
        let t = basis_coefficients(0, &D, &bc(1.0, -1.0)).unwrap();
        assert!((t[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(t[1], 1.0);
        assert!((t[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    fn families() -> Vec<(BoundaryCondition, BoundaryCondition)> {
        vec![
            (D, D),
            (N, N),
            (D, N),
            (N, D),
            (bc(1.0, 1.0), bc(1.0, -1.0)),
            (bc(0.0, 1.0), bc(1.0, 0.0)),
            (D, bc(1.0, -1.0)),
            (D, bc(1.0, -2.0)),
            (bc(2.0, 1.0), bc(1.0, 3.0)),
            (bc(1.0, -0.5), N),
            (bc(-1.0, 2.0), bc(3.0, 1.0)),
            (N, bc(1.0, 0.25)),
        ]
    }

    #[test]
    fn every_basis_function_satisfies_both_conditions() {
        for (l, r) in families() {
            let b = BasisCoefficients::new(l, r, 65).unwrap();
            for n in 0..=64 {
                let t = b.triple(n);
                let max = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((max - 1.0).abs() < 1e-15);
                assert!(t.iter().find(|v| **v != 0.0).unwrap() > &0.0);
                if b.symmetric {
                    assert_eq!(t[1], 0.0);
                }
                let (v, d, _) = b.left_traces(n);
                let scale = (n as f64 + 1.0).powi(2);
                assert!((l.alpha * v + l.beta * d).abs() < 1e-12 * scale, "{l:?} {r:?} n={n}");
                let (v, d) = b.right_traces(n);
                assert!((r.alpha * v + r.beta * d).abs() < 1e-12 * scale, "{l:?} {r:?} n={n}");
            }
        }
    }

    #[test]
    fn asymptotics() {
        for (l, r) in families() {
            let [xi, eta, theta] = basis_coefficients(512, &l, &r).unwrap();
            assert_eq!(xi, 1.0);
            assert!((theta + 1.0).abs() * 512.0 < 50.0);
            if l.beta * r.beta != 0.0 && !is_symmetric_pair(&l, &r) {
                assert!(eta.abs() * 512f64.powi(3) < 1e3, "{l:?} {r:?} {eta}");
            }
        }
    }

    #[test]
    fn trace_examples() {
        let b = BasisCoefficients::new(D, D, 201).unwrap();
        for n in 0..=200 {
            assert_eq!(b.left_traces(n).0, 0.0);
        }
        assert_eq!(b.left_traces(0).1, 3.0);
        let u = b.left_traces(200).2.unwrap();
        assert!((u.abs() / 403.0 - 1.0).abs() < 0.1);
        let nd = BasisCoefficients::new(N, D, 3).unwrap();
        assert!(nd.left_traces(1).2.is_none());
    }

    #[test]
    fn dirichlet_left_factorization() {
        for r in [D, N, bc(1.0, -1.0), bc(1.0, -2.0), bc(2.0, 1.0)] {
            let b = BasisCoefficients::new(D, r, 41).unwrap();
            for n in 0..=40 {
                let [xi, _, theta] = b.triple(n);
                for i in 0..33 {
                    let x = -1.0 + 2.0 * i as f64 / 32.0;
                    let lhs = (1.0 + x)
                        * (xi * polyops::jacobi01_eval(n, x)
                            + theta * polyops::jacobi01_eval(n + 1, x));
                    let rhs = b.eval(n, x);
                    assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn conversion_matrix_shape() {
        let b = BasisCoefficients::new(D, D, 3).unwrap();
        let (r, rt) = build_conversion_matrices(3, &b).unwrap();
        let rt = rt.unwrap();
        assert_eq!((r.rows, r.cols), (5, 3));
        for i in 0..5 {
            for j in 0..3 {
                let want = if i == j {
                    1.0
                } else if i == j + 2 {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(r.get(i, j), want);
            }
        }
        assert_eq!((rt.rows, rt.cols), (4, 3));
        for i in 0..4 {
            for j in 0..3 {
                let want = if i == j {
                    1.0
                } else if i == j + 1 {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(rt.get(i, j), want);
            }
        }
        let g = BasisCoefficients::new(bc(2.0, 1.0), bc(1.0, 3.0), 10).unwrap();
        let (r, rt) = build_conversion_matrices(10, &g).unwrap();
        assert!(r.nonzeros() <= 30);
        assert!(rt.is_none());
    }

    #[test]
    fn problem_validation() {
        let p = |gamma: f64, g: &str, left| ProblemSpec {
            f: crate::expansion::parse("0").unwrap(),
            g: crate::expansion::parse(g).unwrap(),
            gamma,
            bc_left: left,
            bc_right: D,
        };
        assert!(p(0.5, "1", N).validate().is_ok());
        assert!(p(1.5, "1", N).validate().is_err());
        assert!(p(1.5, "1", D).validate().is_ok());
        assert!(p(2.0, "-1", D).validate().is_err());
        assert!(p(2.5, "1", D).validate().is_err());
    }
}
