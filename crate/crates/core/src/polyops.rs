//! Legendre and Jacobi `P^{(0,1)}` polynomials, Gauss rules and gamma helpers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SlpError;
use crate::linalg;
use crate::math;

/// Which end of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `P_n(x)` by the three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_0(x), …, P_{n_max}(x)` written into `out` (length `n_max + 1`).
pub fn legendre_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = x;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// `P_n(±1)`.
pub fn legendre_endpoint(n: usize, side: Side) -> f64 {
    match side {
        Side::Right => 1.0,
        Side::Left => math::parity(n),
    }
}

/// `P'_n(±1)` from the closed form `P'_n(1) = n(n+1)/2`.
pub fn legendre_endpoint_derivative(n: usize, side: Side) -> f64 {
    let v = (n as f64) * (n as f64 + 1.0) / 2.0;
    match side {
        Side::Right => v,
        Side::Left => {
            if n == 0 {
                0.0
            } else {
                math::parity(n - 1) * v
            }
        }
    }
}

/// Recurrence coefficients of `x P_m^{(0,1)}`: `(sub, diag, super)`.
#[inline]
pub fn jacobi01_recurrence(m: usize) -> (f64, f64, f64) {
    let mf = m as f64;
    (
        mf / (2.0 * mf + 1.0),
        1.0 / ((2.0 * mf + 1.0) * (2.0 * mf + 3.0)),
        (mf + 2.0) / (2.0 * mf + 3.0),
    )
}

/// `P_n^{(0,1)}(x)` by the three-term recurrence.
pub fn jacobi01_eval(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (0.0, 1.0);
    for m in 0..n {
        let (lo, mid, hi) = jacobi01_recurrence(m);
        let p2 = ((x - mid) * p1 - lo * p0) / hi;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Weight function of a Gauss rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureKind {
    Legendre,
    /// Weight `(1+x)^beta`.
    Jacobi { beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
}

impl QuadratureRule {
    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Monic recurrence `p_{k+1} = (x − a_k) p_k − b_k p_{k−1}` for weight `(1+x)^β`.
fn jacobi_monic_coefficients(n: usize, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        a[k] = if k == 0 {
            beta / (beta + 2.0)
        } else {
            beta * beta / ((2.0 * kf + beta) * (2.0 * kf + beta + 2.0))
        };
        if k == 1 {
            b[k] = 4.0 * (1.0 + beta) / ((2.0 + beta) * (2.0 + beta) * (3.0 + beta));
        } else if k > 1 {
            let s = 2.0 * kf + beta;
            b[k] = 4.0 * kf * kf * (kf + beta) * (kf + beta) / (s * s * (s + 1.0) * (s - 1.0));
        }
    }
    (a, b)
}

/// Gauss rule with `n` nodes for the given weight on `(-1, 1)`.
pub fn gauss_nodes(n: usize, kind: QuadratureKind) -> Result<QuadratureRule, SlpError> {
    if n == 0 {
        return Err(SlpError::InvalidArgument("quadrature needs at least one node"));
    }
    let beta = match kind {
        QuadratureKind::Legendre => 0.0,
        QuadratureKind::Jacobi { beta } => beta,
    };
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(SlpError::InvalidArgument("Jacobi weight exponent must exceed -1"));
    }
    let mass = math::powf(2.0, beta + 1.0) / (beta + 1.0);
    let (a, b) = jacobi_monic_coefficients(n, beta);
    let mut diag = a.clone();
    let mut sub: Vec<f64> = (0..n)
        .map(|k| if k + 1 < n { math::sqrt(b[k + 1]) } else { 0.0 })
        .collect();
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    linalg::tridiagonal_ql(&mut diag, &mut sub, &mut first, 1)
        .map_err(|_| SlpError::InvalidArgument("quadrature eigenvalue iteration failed"))?;

    let sqrt_b: Vec<f64> = b.iter().map(|v| math::sqrt(*v)).collect();
    let p0 = 1.0 / math::sqrt(mass);
    // Orthonormal recurrence: value, derivative, and Christoffel sum at x.
    let eval = |x: f64| -> (f64, f64, f64) {
        let (mut pm, mut p) = (0.0, p0);
        let (mut dm, mut d) = (0.0, 0.0);
        let mut sum = p * p;
        for k in 0..n {
            let next_b = if k + 1 < n { sqrt_b[k + 1] } else { 1.0 };
            let pn = ((x - a[k]) * p - sqrt_b[k] * pm) / next_b;
            let dn = (p + (x - a[k]) * d - sqrt_b[k] * dm) / next_b;
            pm = p;
            p = pn;
            dm = d;
            d = dn;
            if k + 1 < n {
                sum += p * p;
            }
        }
        (p, d, sum)
    };

    let mut nodes = diag;
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = nodes[i];
        for _ in 0..3 {
            let (p, d, _) = eval(x);
            if d == 0.0 {
                break;
            }
            let step = p / d;
            x -= step;
            if math::abs(step) <= 1e-16 * (1.0 + math::abs(x)) {
                break;
            }
        }
        let (_, _, sum) = eval(x);
        nodes[i] = x;
        weights[i] = 1.0 / sum;
    }
    Ok(QuadratureRule { nodes, weights, kind })
}

/// Rising factorial `t (t+1) ⋯ (t+ℓ−1)`.
pub fn pochhammer(t: f64, l: usize) -> f64 {
    (0..l).fold(1.0, |acc, k| acc * (t + k as f64))
}

/// `Γ(a)/Γ(b)` with `1/Γ` semantics at poles of the denominator.
pub fn gamma_ratio_safe(a: f64, b: f64) -> Result<f64, SlpError> {
    if math::is_gamma_pole(b) {
        return Ok(0.0);
    }
    if math::is_gamma_pole(a) {
        return Err(SlpError::GammaPole(a));
    }
    let (la, sa) = math::lgamma_signed(a);
    let (lb, sb) = math::lgamma_signed(b);
    Ok(sa * sb * math::exp(la - lb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_eval(2, 0.0), -0.5);
        assert_eq!(legendre_eval(5, 1.0), 1.0);
        // P_7(3/10) from its integer coefficients, evaluated exactly.
        let num: i128 = 429 * 3i128.pow(7) - 693 * 3i128.pow(5) * 100 + 315 * 27 * 10_000
            - 35 * 3 * 1_000_000;
        let want = num as f64 / (16.0 * 1e7);
        assert!((legendre_eval(7, 0.3) - want).abs() < 1e-14);
    }

    #[test]
    fn endpoint_derivatives() {
        assert_eq!(legendre_endpoint_derivative(3, Side::Right), 6.0);
        assert_eq!(legendre_endpoint_derivative(3, Side::Left), 6.0);
        assert_eq!(legendre_endpoint_derivative(4, Side::Left), -10.0);
        assert_eq!(legendre_endpoint_derivative(0, Side::Right), 0.0);
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi01_eval(0, 0.7), 1.0);
        assert!((jacobi01_eval(4, 1.0) - 1.0).abs() < 1e-14);
        assert!((jacobi01_eval(3, -1.0) + 4.0).abs() < 1e-13);
        for n in 0..=6 {
            let want = math::parity(n) * (n as f64 + 1.0);
            assert!((jacobi01_eval(n, -1.0) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_derivative_at_one() {
        let h = 1e-5;
        for n in 0..=12 {
            let d = (jacobi01_eval(n, 1.0) - jacobi01_eval(n, 1.0 - h)) / h;
            let d2 = (jacobi01_eval(n, 1.0) - jacobi01_eval(n, 1.0 - 2.0 * h)) / (2.0 * h);
            let richardson = 2.0 * d - d2;
            let want = (n * (n + 2)) as f64 / 2.0;
            assert!((richardson - want).abs() < 1e-6 * (1.0 + want), "n={n}");
        }
    }

    #[test]
    fn gauss_examples() {
        let r = gauss_nodes(1, QuadratureKind::Legendre).unwrap();
        assert!(r.nodes[0].abs() < 1e-15);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
        let r = gauss_nodes(2, QuadratureKind::Legendre).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + s).abs() < 1e-15 && (r.nodes[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-14 && (r.weights[1] - 1.0).abs() < 1e-14);
        let r = gauss_nodes(4, QuadratureKind::Jacobi { beta: -0.5 }).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(gauss_nodes(4, QuadratureKind::Jacobi { beta: -1.0 }).is_err());
    }

    #[test]
    fn gauss_rules_are_exact_on_monomials() {
        for beta in [0.0, -0.25, 0.5, 1.0, -0.75] {
            let n = 7;
            let r = gauss_nodes(n, QuadratureKind::Jacobi { beta }).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes.iter().all(|x| *x > -1.0 && *x < 1.0));
            assert!(r.weights.iter().all(|w| *w > 0.0));
            // ∫(1+x)^β (1+x)^k dx = 2^{β+k+1}/(β+k+1)
            for k in 0..2 * n {
                let got = r.integrate(|x| (1.0 + x).powi(k as i32));
                let want = 2f64.powf(beta + k as f64 + 1.0) / (beta + k as f64 + 1.0);
                assert!((got - want).abs() < 1e-12 * want, "beta={beta} k={k}");
            }
        }
    }

    #[test]
    fn legendre_orthogonality() {
        let r = gauss_nodes(40, QuadratureKind::Legendre).unwrap();
        for m in 0..=20 {
            for n in 0..=20 {
                let v = r.integrate(|x| legendre_eval(m, x) * legendre_eval(n, x));
                let want = if m == n { 2.0 / (2.0 * n as f64 + 1.0) } else { 0.0 };
                assert!((v - want).abs() < 1e-13, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn jacobi_orthogonality() {
        let r = gauss_nodes(40, QuadratureKind::Jacobi { beta: 1.0 }).unwrap();
        for m in 0..=20 {
            for n in 0..m {
                let v = r.integrate(|x| jacobi01_eval(m, x) * jacobi01_eval(n, x));
                assert!(v.abs() < 1e-12, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn large_legendre_rule() {
        let r = gauss_nodes(512, QuadratureKind::Legendre).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
        let v = r.integrate(|x| legendre_eval(300, x) * legendre_eval(300, x));
        assert!((v - 2.0 / 601.0).abs() < 1e-14);
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(0.5, 2), 0.75);
        assert_eq!(pochhammer(0.3, 0), 1.0);
        assert_eq!(pochhammer(0.0, 3), 0.0);
    }

    #[test]
    fn gamma_ratio_examples() {
        assert!((gamma_ratio_safe(3.0, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(gamma_ratio_safe(2.5, 0.0).unwrap(), 0.0);
        assert!((gamma_ratio_safe(1.5, 0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!(gamma_ratio_safe(-1.0, 0.5).is_err());
        // Negative non-integer arguments carry the reflection sign.
        let want = math::tgamma(-0.5) / math::tgamma(1.5);
        assert!((gamma_ratio_safe(-0.5, 1.5).unwrap() - want).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn legendre_bounded(n in 0usize..=64, j in 0usize..21) {
            let x = (core::f64::consts::PI * (j as f64 + 0.5) / 21.0).cos();
            prop_assert!(legendre_eval(n, x).abs() <= 1.0 + 1e-14);
        }
    }
}
