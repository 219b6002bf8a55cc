//! End-to-end solves: projection, assembly, eigensolve and correction.

use alloc::format;
use alloc::vec::Vec;

use crate::assembly::{assemble_system, AssemblyPath, BExtended, PotentialSeries, SpectralSystem};
use crate::basis::{BasisCoefficients, ProblemSpec};
use crate::correction::{self, CorrectionConstants, CorrectionReport};
use crate::eigensolve::{self, EigenResult};
use crate::error::SlpError;
use crate::expansion::project_legendre;
use crate::validation::{estimate_order_above, Order};

/// Default Legendre projection tolerance for `f` and `g`.
pub const PROJECTION_TOL: f64 = 1e-15;

/// A validated problem with its potential projected once, reusable for any `N`.
#[derive(Debug, Clone)]
pub struct Pipeline {
    spec: ProblemSpec,
    potential: PotentialSeries,
    constants: CorrectionConstants,
}

/// Result of one solve at a fixed `N`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub n: usize,
    pub eigen: EigenResult,
    pub correction: CorrectionReport,
    pub b_extended: BExtended,
    pub path: AssemblyPath,
    pub raw_asymmetry: f64,
}

impl Solution {
    pub fn lambdas(&self) -> Vec<f64> {
        self.eigen.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn mus(&self) -> Vec<f64> {
        self.correction.values.iter().map(|v| v.mu).collect()
    }
}

impl Pipeline {
    pub fn new(spec: &ProblemSpec) -> Result<Self, SlpError> {
        Self::with_tolerance(spec, PROJECTION_TOL)
    }

    pub fn with_tolerance(spec: &ProblemSpec, tol: f64) -> Result<Self, SlpError> {
        spec.validate()?;
        let potential = PotentialSeries {
            f: project_legendre(&spec.f, tol)?,
            g: project_legendre(&spec.g, tol)?,
            gamma: spec.gamma,
        }
        .normalized();
        let g_left = if potential.g.is_zero() { 0.0 } else { spec.g_left() };
        let constants = correction::select_algorithm(spec.gamma, g_left, &spec.bc_left);
        Ok(Self {
            spec: spec.clone(),
            potential,
            constants,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn potential(&self) -> &PotentialSeries {
        &self.potential
    }

    pub fn constants(&self) -> &CorrectionConstants {
        &self.constants
    }

    /// Basis triples for indices `0..N+2`.
    pub fn basis(&self, n: usize) -> Result<BasisCoefficients, SlpError> {
        BasisCoefficients::new(self.spec.bc_left, self.spec.bc_right, n + 2)
    }

    pub fn system(&self, n: usize) -> Result<SpectralSystem, SlpError> {
        assemble_system(n, &self.potential, &self.basis(n)?)
    }

    /// Lowest `m` eigenvalues at dimension `n`, with corrections.
    pub fn solve(&self, n: usize, m: usize) -> Result<Solution, SlpError> {
        if m == 0 || m > n {
            return Err(SlpError::TooManyEigenpairs { requested: m, dim: n });
        }
        let system = self.system(n)?;
        self.solve_system(&system, m)
    }

    pub fn solve_system(&self, system: &SpectralSystem, m: usize) -> Result<Solution, SlpError> {
        let eigen = eigensolve::solve(system, m)?;
        let correction = correction::correct(
            &eigen,
            &system.b_extended,
            &self.constants,
            self.spec.gamma,
            self.spec.g_left(),
        );
        Ok(Solution {
            n: system.n,
            eigen,
            correction,
            b_extended: system.b_extended,
            path: system.path,
            raw_asymmetry: system.raw_asymmetry,
        })
    }
}

/// Check that consecutive sizes follow `N → 2N+1`.
pub fn check_doubling(ns: &[usize]) -> Result<(), SlpError> {
    if ns.len() < 2 {
        return Err(SlpError::InvalidArgument("N-list needs at least two sizes"));
    }
    for w in ns.windows(2) {
        if w[1] != 2 * w[0] + 1 {
            return Err(SlpError::InvalidArgument("N-list must follow N -> 2N+1"));
        }
    }
    Ok(())
}

/// Sizes to solve for a convergence table: the list plus `2N_last + 1`.
pub fn convergence_sizes(ns: &[usize]) -> Result<Vec<usize>, SlpError> {
    check_doubling(ns)?;
    let mut out = ns.to_vec();
    out.push(2 * ns[ns.len() - 1] + 1);
    Ok(out)
}

/// Differences within this many units in the last place of `|λ|` carry no order.
pub const ROUNDOFF_ULPS: f64 = 4.0;

/// `δ_{k,N}` and orders for one eigenvalue index.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceColumn {
    pub k: usize,
    pub delta_lambda: Vec<f64>,
    pub order_lambda: Vec<Order>,
    pub delta_mu: Vec<f64>,
    pub order_mu: Vec<Order>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub ns: Vec<usize>,
    pub columns: Vec<ConvergenceColumn>,
}

impl ConvergenceTable {
    /// Build from solutions at `convergence_sizes(ns)`, in that order.
    pub fn from_solutions(ns: &[usize], ks: &[usize], solutions: &[Solution]) -> Result<Self, SlpError> {
        let sizes = convergence_sizes(ns)?;
        if solutions.len() != sizes.len() || solutions.iter().zip(&sizes).any(|(s, n)| s.n != *n) {
            return Err(SlpError::InvalidArgument("solutions do not match the N-list"));
        }
        let mut columns = Vec::with_capacity(ks.len());
        for &k in ks {
            if k == 0 || solutions.iter().any(|s| s.eigen.pairs.len() < k) {
                return Err(SlpError::TooManyEigenpairs {
                    requested: k,
                    dim: solutions[0].eigen.pairs.len(),
                });
            }
            let deltas = |get: &dyn Fn(&Solution) -> f64| -> Vec<f64> {
                solutions.windows(2).map(|w| (get(&w[0]) - get(&w[1])).abs()).collect()
            };
            let delta_lambda = deltas(&|s| s.eigen.pairs[k - 1].lambda);
            let delta_mu = deltas(&|s| s.correction.values[k - 1].mu);
            let scale = solutions
                .iter()
                .map(|s| s.eigen.pairs[k - 1].lambda.abs())
                .fold(0.0, f64::max);
            let floor = ROUNDOFF_ULPS * f64::EPSILON * scale;
            columns.push(ConvergenceColumn {
                k,
                order_lambda: estimate_order_above(&delta_lambda, floor)?,
                order_mu: estimate_order_above(&delta_mu, floor)?,
                delta_lambda,
                delta_mu,
            });
        }
        Ok(Self {
            ns: ns.to_vec(),
            columns,
        })
    }
}

/// Sequential convergence table over `ns` for eigenvalue indices `ks`.
pub fn convergence_table(pipeline: &Pipeline, ns: &[usize], ks: &[usize]) -> Result<ConvergenceTable, SlpError> {
    let m = ks.iter().copied().max().ok_or(SlpError::InvalidArgument("empty k-list"))?;
    let solutions = convergence_sizes(ns)?
        .into_iter()
        .map(|n| pipeline.solve(n, m))
        .collect::<Result<Vec<_>, _>>()?;
    ConvergenceTable::from_solutions(ns, ks, &solutions)
}

/// Ratio `ẑ_N(-1)/ŷ_N(-1)` for one size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaRatio {
    pub n: usize,
    pub zhat: f64,
    pub yhat: f64,
    pub ratio: f64,
}

/// Compare `ẑ_N(-1)` with the `N`-truncated slope of a reference solve at `n_ref`.
pub fn kappa_ratio_study(
    pipeline: &Pipeline,
    ns: &[usize],
    n_ref: usize,
    k: usize,
) -> Result<Vec<KappaRatio>, SlpError> {
    if pipeline.spec().gamma != 2.0 {
        return Err(SlpError::Unsupported("ratio study needs gamma = 2".into()));
    }
    let max_n = ns.iter().copied().max().ok_or(SlpError::InvalidArgument("empty N-list"))?;
    if n_ref < 4 * max_n {
        return Err(SlpError::SizeTooSmall {
            size: n_ref,
            needed: 4 * max_n,
        });
    }
    let reference = pipeline.solve(n_ref, k)?;
    let coeffs = &reference.eigen.pairs[k - 1].zeta;
    let basis = pipeline.basis(n_ref)?;
    ns.iter()
        .map(|&n| {
            let sol = pipeline.solve(n, k)?;
            let pair = &sol.eigen.pairs[k - 1];
            let zhat = pair
                .zhat_left
                .ok_or_else(|| SlpError::Unsupported(format!("no left slope trace at N = {n}")))?;
            let yhat = correction::truncated_slope(&basis, coeffs, n);
            Ok(KappaRatio {
                n,
                zhat,
                yhat,
                ratio: zhat / yhat,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn doubling_rule() {
        assert!(check_doubling(&[49, 99, 199, 399]).is_ok());
        assert!(check_doubling(&[50, 100]).is_err());
        assert!(check_doubling(&[49]).is_err());
        assert_eq!(convergence_sizes(&[7, 15]).unwrap(), [7, 15, 31]);
    }

    #[test]
    fn free_problem_solve() {
        let p = Pipeline::new(&catalog::free((1.0, 0.0), (1.0, 0.0))).unwrap();
        let s = p.solve(24, 3).unwrap();
        let h = core::f64::consts::PI / 2.0;
        for (k, (l, m)) in s.lambdas().iter().zip(s.mus()).enumerate() {
            let want = (h * (k + 1) as f64).powi(2);
            assert!((l - want).abs() < 1e-10 * want);
            assert_eq!(*l, m);
        }
        assert_eq!(p.solve(4, 5).unwrap_err(), SlpError::TooManyEigenpairs { requested: 5, dim: 4 });
    }

    #[test]
    fn kappa_degenerate_case() {
        let p = Pipeline::new(&catalog::runge_sinh(0.75)).unwrap();
        let r = kappa_ratio_study(&p, &[20], 80, 1).unwrap();
        assert!(r[0].ratio.is_finite());
        assert!(kappa_ratio_study(&p, &[30], 80, 1).is_err());
        let reference = p.solve(40, 1).unwrap();
        let basis = p.basis(40).unwrap();
        let full = correction::truncated_slope(&basis, &reference.eigen.pairs[0].zeta, 40);
        assert!((full / reference.eigen.pairs[0].zhat_left.unwrap() - 1.0).abs() < 1e-12);
    }
}
