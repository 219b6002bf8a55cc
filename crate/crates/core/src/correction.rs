//! A-posteriori eigenvalue corrections for singular left endpoints.
//!
//! Three regimes are covered: `γ ∈ (0,1)` without a Dirichlet condition at
//! `x = -1`, `γ ∈ (0,2)∖{1}` with one, and `γ = 2` with `g(-1) > 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::assembly::BExtended;
use crate::basis::{BasisCoefficients, BoundaryCondition};
use crate::eigensolve::{EigenPair, EigenResult};
use crate::error::SlpError;
use crate::math;
use crate::polyops;

/// Which correction applies and the constants it uses.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrectionConstants {
    /// No correction: the reason is kept for reporting.
    None { reason: String },
    /// `γ ∈ (0,1)`, non-Dirichlet left condition.
    WeaklyRegular { p: f64, omega: f64 },
    /// `γ ∈ (0,2)∖{1}`, Dirichlet left condition.
    DirichletSingular {
        p: f64,
        terms: usize,
        chi: Vec<f64>,
        omega_hat: Vec<f64>,
        omega: Vec<f64>,
    },
    /// `γ = 2`, `g(-1) > 0`.
    InverseSquare { p: f64, rho: f64, kappa: f64 },
}

impl CorrectionConstants {
    pub fn order(&self) -> Option<f64> {
        match self {
            CorrectionConstants::None { .. } => None,
            CorrectionConstants::WeaklyRegular { p, .. }
            | CorrectionConstants::DirichletSingular { p, .. }
            | CorrectionConstants::InverseSquare { p, .. } => Some(*p),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CorrectionConstants::None { .. } => "none",
            CorrectionConstants::WeaklyRegular { .. } => "alg1",
            CorrectionConstants::DirichletSingular { .. } => "alg2",
            CorrectionConstants::InverseSquare { .. } => "alg3",
        }
    }
}

/// Exponent of the indicial equation `ρ² − ρ − g(-1) = 0`.
pub fn indicial_root(g_left: f64) -> f64 {
    (1.0 + math::sqrt(1.0 + 4.0 * g_left)) / 2.0
}

fn is_natural(x: f64) -> bool {
    x >= 1.0 && math::abs(x - math::round(x)) < 1e-12
}

/// Constants for the weakly regular, non-Dirichlet case.
pub fn weakly_regular_constants(gamma: f64) -> Result<CorrectionConstants, SlpError> {
    let ratio = polyops::gamma_ratio_safe(3.0 - gamma, gamma)?;
    Ok(CorrectionConstants::WeaklyRegular {
        p: 6.0 - 4.0 * gamma,
        omega: math::powf(2.0, 2.0 - gamma) * ratio / (1.0 - gamma),
    })
}

/// Constants for the Dirichlet-left case, `γ ∈ (0,2)∖{1}`.
pub fn dirichlet_constants(gamma: f64, g_left: f64) -> Result<CorrectionConstants, SlpError> {
    let s = 2.0 - gamma;
    let terms = math::ceil((gamma - 1.0) / s).max(0.0) as usize;
    let lead = math::powf(2.0, 4.0 - gamma) * polyops::gamma_ratio_safe(3.0 - gamma, gamma - 1.0)?;
    let mut chi = Vec::with_capacity(terms + 1);
    let mut omega_hat = Vec::with_capacity(terms + 1);
    let mut omega = Vec::with_capacity(terms + 1);
    let mut c = 1.0;
    for j in 0..=terms {
        let e = s * (j as f64 + 1.0);
        let oh = math::powf(2.0, e) * polyops::gamma_ratio_safe(1.0 + e, 1.0 - e)? * c;
        chi.push(c);
        omega_hat.push(oh);
        omega.push(lead * oh);
        let jf = j as f64 + 1.0;
        c *= g_left / (jf * s * (1.0 + jf * s));
    }
    Ok(CorrectionConstants::DirichletSingular {
        p: 10.0 - 4.0 * gamma,
        terms,
        chi,
        omega_hat,
        omega,
    })
}

/// Choose the correction for a problem.
pub fn select_algorithm(gamma: f64, g_left: f64, bc_left: &BoundaryCondition) -> CorrectionConstants {
    let none = |reason: &str| CorrectionConstants::None {
        reason: reason.into(),
    };
    if gamma == 0.0 {
        return none("regular endpoint (gamma = 0): exponential convergence");
    }
    if gamma == 1.0 {
        return none("gamma = 1: exponential convergence");
    }
    if g_left == 0.0 {
        return none("g(-1) = 0: no leading singular term");
    }
    if gamma < 1.0 && !bc_left.is_dirichlet() {
        return weakly_regular_constants(gamma).unwrap_or_else(|e| none(&format!("{e}")));
    }
    if gamma < 2.0 && bc_left.is_dirichlet() {
        return dirichlet_constants(gamma, g_left).unwrap_or_else(|e| none(&format!("{e}")));
    }
    if gamma == 2.0 && bc_left.is_dirichlet() {
        if g_left <= 0.0 {
            return none("gamma = 2 needs g(-1) > 0 for a correction");
        }
        let rho = indicial_root(g_left);
        if is_natural(rho) {
            return none(&format!(
                "indicial root rho = {rho} is a natural number; the error expansion does not apply"
            ));
        }
        return CorrectionConstants::InverseSquare {
            p: 4.0 * rho - 2.0,
            rho,
            kappa: (2.0 * rho - 1.0) / (rho * rho),
        };
    }
    none("no correction for this configuration")
}

/// `ε̄_N = c̄_N ⟨z_N, R_N⟩ + c̄_{N+1} ⟨z_N, R_{N+1}⟩`.
pub fn epsilon_bar(zeta: &[f64], c_bar_n: f64, c_bar_n1: f64, ext: &BExtended) -> f64 {
    let n = zeta.len();
    let last = zeta[n - 1];
    let before = if n >= 2 { zeta[n - 2] } else { 0.0 };
    c_bar_n * (ext.n_nm2 * before + ext.n_nm1 * last) + c_bar_n1 * ext.np1_nm1 * last
}

/// Corrected value of one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedValue {
    pub lambda: f64,
    pub mu: f64,
    pub epsilon_bar: f64,
    pub c_bar_n: f64,
    pub c_bar_n1: f64,
    /// `N < 4k`.
    pub low_confidence: bool,
}

/// Algorithm 1 correction; returns `(μ, ε̄, c̄_N, c̄_{N+1})`.
#[allow(clippy::too_many_arguments)]
pub fn correct_alg1(
    lambda: f64,
    z_left: f64,
    g_left: f64,
    p: f64,
    omega: f64,
    n: usize,
    ext: &BExtended,
    zeta: &[f64],
) -> (f64, f64, f64, f64) {
    let amp = omega * g_left * z_left;
    let c = |idx: usize| -math::parity(idx) * amp / 2.0 * math::powf(idx as f64 + 1.5, -p / 2.0 - 1.0);
    let (cn, cn1) = (c(n), c(n + 1));
    let eps = epsilon_bar(zeta, cn, cn1, ext);
    let mu = lambda * (1.0 - eps) - amp * amp / (p * math::powf(n as f64 + 1.0, p));
    (mu, eps, cn, cn1)
}

/// `d_N` of the Dirichlet-left correction.
pub fn dirichlet_d(gamma: f64, g_left: f64, omega_hat: &[f64], n: usize) -> f64 {
    let s = 2.0 - gamma;
    let np1 = n as f64 + 1.0;
    g_left / s
        * omega_hat
            .iter()
            .enumerate()
            .map(|(j, oh)| {
                let jf = j as f64 + 1.0;
                oh / (jf * math::powf(np1, 2.0 * s * jf))
            })
            .sum::<f64>()
}

/// Algorithm 2 correction; returns `(μ, ε̄, c̄_N, c̄_{N+1}, d_N)`.
#[allow(clippy::too_many_arguments)]
pub fn correct_alg2(
    lambda: f64,
    zprime_left: f64,
    g_left: f64,
    gamma: f64,
    constants: &CorrectionConstants,
    n: usize,
    ext: &BExtended,
    zeta: &[f64],
) -> (f64, f64, f64, f64, f64) {
    let CorrectionConstants::DirichletSingular {
        p,
        omega_hat,
        omega,
        ..
    } = constants
    else {
        return (lambda, 0.0, 0.0, 0.0, 0.0);
    };
    let p = *p;
    let s = 2.0 - gamma;
    let d = dirichlet_d(gamma, g_left, omega_hat, n);
    let slope = zprime_left / (1.0 + d);
    let c = |idx: usize| {
        let base = idx as f64 + 1.5;
        -math::parity(idx)
            * g_left
            * slope
            * omega_hat
                .iter()
                .enumerate()
                .map(|(j, oh)| oh * math::powf(base, -p / 2.0 - 1.0 - 2.0 * j as f64 * s))
                .sum::<f64>()
    };
    let (cn, cn1) = (c(n), c(n + 1));
    let eps = epsilon_bar(zeta, cn, cn1, ext);
    let np1 = n as f64 + 1.0;
    let tail: f64 = omega
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let e = 2.0 * j as f64 * s;
            w / ((p + e) * math::powf(np1, e))
        })
        .sum();
    let amp = g_left * zprime_left;
    let mu = lambda * (1.0 - eps) - amp * amp / ((1.0 + d) * math::powf(np1, p)) * tail;
    (mu, eps, cn, cn1, d)
}

/// Algorithm 3 correction; returns `(μ, ε̄, c̄_N, c̄_{N+1})`.
pub fn correct_alg3(
    lambda: f64,
    zhat_left: f64,
    rho: f64,
    n: usize,
    ext: &BExtended,
    zeta: &[f64],
) -> (f64, f64, f64, f64) {
    let np1 = n as f64 + 1.0;
    let lead = (rho - 1.0) * rho * rho * zhat_left / ((2.0 * rho - 1.0) * np1 * np1);
    let c = |idx: usize| {
        -math::parity(idx) * lead * math::powf((2.0 * np1) / (2.0 * idx as f64 + 3.0), 2.0 * rho)
    };
    let (cn, cn1) = (c(n), c(n + 1));
    let eps = epsilon_bar(zeta, cn, cn1, ext);
    let t = rho * (rho - 1.0) * zhat_left / np1;
    let mu = (1.0 - eps) * lambda - 2.0 / (2.0 * rho - 1.0) * t * t;
    (mu, eps, cn, cn1)
}

/// Corrections for every returned eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionReport {
    pub constants: CorrectionConstants,
    /// `d_N` (Dirichlet-left correction only).
    pub d_n: Option<f64>,
    pub values: Vec<CorrectedValue>,
}

/// Apply the selected correction to each eigenpair of `eigen`.
pub fn correct(
    eigen: &EigenResult,
    ext: &BExtended,
    constants: &CorrectionConstants,
    gamma: f64,
    g_left: f64,
) -> CorrectionReport {
    let n = eigen.n;
    let mut d_n = None;
    let values = eigen
        .pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let (mu, eps, cn, cn1) = correct_pair(pair, ext, constants, gamma, g_left, n, &mut d_n);
            CorrectedValue {
                lambda: pair.lambda,
                mu,
                epsilon_bar: eps,
                c_bar_n: cn,
                c_bar_n1: cn1,
                low_confidence: n < 4 * (i + 1),
            }
        })
        .collect();
    CorrectionReport {
        constants: constants.clone(),
        d_n,
        values,
    }
}

fn correct_pair(
    pair: &EigenPair,
    ext: &BExtended,
    constants: &CorrectionConstants,
    gamma: f64,
    g_left: f64,
    n: usize,
    d_n: &mut Option<f64>,
) -> (f64, f64, f64, f64) {
    match constants {
        CorrectionConstants::None { .. } => (pair.lambda, 0.0, 0.0, 0.0),
        CorrectionConstants::WeaklyRegular { p, omega } => {
            correct_alg1(pair.lambda, pair.z_left, g_left, *p, *omega, n, ext, &pair.zeta)
        }
        CorrectionConstants::DirichletSingular { .. } => {
            let (mu, eps, cn, cn1, d) = correct_alg2(
                pair.lambda,
                pair.zprime_left,
                g_left,
                gamma,
                constants,
                n,
                ext,
                &pair.zeta,
            );
            *d_n = Some(d);
            (mu, eps, cn, cn1)
        }
        CorrectionConstants::InverseSquare { rho, .. } => {
            let zhat = pair.zhat_left.unwrap_or(pair.zprime_left);
            correct_alg3(pair.lambda, zhat, *rho, n, ext, &pair.zeta)
        }
    }
}

/// `ŷ_N(-1) = Σ_{n<N} c_n U_n(-1)` from reference coefficients `c`.
pub fn truncated_slope(basis: &BasisCoefficients, reference: &[f64], n: usize) -> f64 {
    reference[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c * basis.left_traces(i).1)
        .sum()
}
