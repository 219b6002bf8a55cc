//! Lowest eigenpairs of the pencil `(A + Q, B)`.
//!
//! `K − σB` is factored once by dense Cholesky with a shift `σ` below the
//! lowest eigenvalue; Lanczos with full reorthogonalization then runs on
//! `G⁻¹ B G⁻ᵀ`, whose largest eigenvalues `1/(λ − σ)` belong to the smallest
//! `λ`. Each Ritz vector is mapped back and its eigenvalue recomputed as a
//! Rayleigh quotient of the original pencil.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::SpectralSystem;
use crate::basis::BasisCoefficients;
use crate::error::SlpError;
use crate::expansion::LegendreSeries;
use crate::linalg::{self, DenseMatrix, SymPentadiagonal};
use crate::math;

/// One eigenpair with the left-endpoint traces of `z_N = Σ ζ_n R_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub zeta: Vec<f64>,
    /// `z_N(-1)`
    pub z_left: f64,
    /// `z'_N(-1)`
    pub zprime_left: f64,
    /// `ẑ_N(-1) = Σ ζ_n U_n(-1)` (Dirichlet-left only)
    pub zhat_left: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub n: usize,
    pub pairs: Vec<EigenPair>,
    pub warnings: Vec<String>,
    /// Shift used for the factorization.
    pub shift: f64,
    pub lanczos_steps: usize,
}

const PILOT_DIM: usize = 32;
const LANCZOS_TOL: f64 = 1e-13;
const GUARD: usize = 2;

/// Dense generalized eigensolver for small pencils (`B` positive definite).
///
/// Returns ascending eigenvalues and `B`-orthonormal eigenvectors as columns.
pub fn dense_generalized_eigen(
    k: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<(Vec<f64>, DenseMatrix), SlpError> {
    let n = k.rows();
    let mut l = b.clone();
    linalg::cholesky_in_place(&mut l)
        .map_err(|e| SlpError::Eigensolve(format!("B not positive definite at pivot {}", e.pivot)))?;
    // C = L⁻¹ K L⁻ᵀ, built column by column.
    let mut c = DenseMatrix::zeros(n, n);
    let mut tmp = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| k.get(i, j)).collect();
        linalg::solve_lower_in_place(&l, &mut col);
        for (i, v) in col.into_iter().enumerate() {
            tmp.set(j, i, v);
        }
    }
    // tmp = (L⁻¹K)ᵀ; C = (L⁻¹ tmp)ᵀ.
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| tmp.get(i, j)).collect();
        linalg::solve_lower_in_place(&l, &mut col);
        for (i, v) in col.into_iter().enumerate() {
            c.set(j, i, v);
        }
    }
    c.symmetrize();
    let (vals, vecs) = linalg::jacobi_eigen(&c);
    let mut out = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| vecs.get(i, j)).collect();
        linalg::solve_lower_transpose_in_place(&l, &mut col);
        for (i, v) in col.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok((vals, out))
}

fn pilot_lowest(system: &SpectralSystem) -> Result<f64, SlpError> {
    let ns = system.n.min(PILOT_DIM);
    let k = DenseMatrix::from_fn(ns, ns, |i, j| {
        system.q.get(i, j) + if i == j { system.a[i] } else { 0.0 }
    });
    let b = DenseMatrix::from_fn(ns, ns, |i, j| system.b.get(i, j));
    let (vals, _) = dense_generalized_eigen(&k, &b)?;
    Ok(vals[0])
}

/// Factor `K − σB` in place, where `K = diag(a) + Q`.
fn factor_shifted(system: &SpectralSystem, sigma: f64) -> Result<DenseMatrix, linalg::NotPositiveDefinite> {
    let n = system.n;
    let mut m = system.q.clone();
    for i in 0..n {
        let row = m.row_mut(i);
        row[i] += system.a[i] - sigma * system.b.diag[i];
        if i + 1 < n {
            row[i + 1] -= sigma * system.b.off1[i];
        }
        if i + 2 < n {
            row[i + 2] -= sigma * system.b.off2[i];
        }
        if i >= 1 {
            row[i - 1] -= sigma * system.b.off1[i - 1];
        }
        if i >= 2 {
            row[i - 2] -= sigma * system.b.off2[i - 2];
        }
    }
    linalg::cholesky_in_place(&mut m)?;
    Ok(m)
}

struct ShiftInvert<'a> {
    g: &'a DenseMatrix,
    b: &'a SymPentadiagonal,
    scratch: Vec<f64>,
}

impl ShiftInvert<'_> {
    /// `y = G⁻¹ B G⁻ᵀ x`.
    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        self.scratch.copy_from_slice(x);
        linalg::solve_lower_transpose_in_place(self.g, &mut self.scratch);
        self.b.mul_vec_into(&self.scratch, y);
        linalg::solve_lower_in_place(self.g, y);
    }
}

/// Deterministic start vector with components along every coordinate.
fn start_vector(n: usize, salt: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let v = (i + 7 * salt + 1) as f64 * GOLDEN;
            let t = v - math::floor(v);
            t - 0.5 + 1e-3
        })
        .collect()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = linalg::dot(q, w);
            linalg::axpy(-c, q, w);
        }
    }
}

struct RitzPairs {
    values: Vec<f64>,
    /// Row-major `k × k`; column `i` is the eigenvector of `values[i]`.
    vectors: Vec<f64>,
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<RitzPairs, SlpError> {
    let k = alpha.len();
    let mut d = alpha.to_vec();
    let mut e = vec![0.0; k];
    e[..k - 1].copy_from_slice(&beta[..k - 1]);
    let mut z = vec![0.0; k * k];
    for i in 0..k {
        z[i * k + i] = 1.0;
    }
    linalg::tridiagonal_ql(&mut d, &mut e, &mut z, k)
        .map_err(|_| SlpError::Eigensolve("tridiagonal QL did not converge".into()))?;
    Ok(RitzPairs {
        values: d,
        vectors: z,
    })
}

/// The `m` algebraically smallest eigenpairs, `B`-normalized and sign-fixed.
pub fn solve(system: &SpectralSystem, m: usize) -> Result<EigenResult, SlpError> {
    let n = system.n;
    if m == 0 || m > n {
        return Err(SlpError::TooManyEigenpairs { requested: m, dim: n });
    }
    let mut warnings = Vec::new();

    let pilot = pilot_lowest(system)?;
    let mut margin = math::abs(pilot).max(1.0);
    let mut sigma = pilot - margin;
    let mut attempts = 0;
    let g = loop {
        match factor_shifted(system, sigma) {
            Ok(g) => break g,
            Err(_) if attempts < 40 => {
                attempts += 1;
                margin *= 2.0;
                sigma = pilot - margin;
            }
            Err(e) => {
                return Err(SlpError::Eigensolve(format!(
                    "shifted factorization failed at pivot {} (shift {sigma})",
                    e.pivot
                )))
            }
        }
    };

    let want = (m + GUARD).min(n);
    let mut op = ShiftInvert {
        g: &g,
        b: &system.b,
        scratch: vec![0.0; n],
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = start_vector(n, 0);
    let nq = linalg::norm2(&q);
    q.iter_mut().for_each(|v| *v /= nq);
    let mut w = vec![0.0; n];
    let mut restarts = 0;
    let mut ritz = None;
    let mut theta_max: f64 = 0.0;
    loop {
        op.apply(&q, &mut w);
        let a = linalg::dot(&q, &w);
        linalg::axpy(-a, &q, &mut w);
        if let (Some(prev), Some(b)) = (basis.last(), beta.last()) {
            linalg::axpy(-b, prev, &mut w);
        }
        basis.push(core::mem::take(&mut q));
        alpha.push(a);
        theta_max = theta_max.max(math::abs(a));
        orthogonalize(&mut w, &basis);
        let mut b = linalg::norm2(&w);
        let k = basis.len();
        let full = k == n;
        let check = full || (k >= want && (k - want).is_multiple_of(8)) || b <= 1e-14 * theta_max;
        if check {
            let pairs = tridiagonal_eigen(&alpha, &beta_with(&beta, b))?;
            theta_max = theta_max.max(pairs.values[k - 1]);
            let converged = full
                || (k >= want
                    && (0..want).all(|t| {
                        let i = k - 1 - t;
                        math::abs(b * pairs.vectors[(k - 1) * k + i]) <= LANCZOS_TOL * theta_max
                    }));
            if converged {
                ritz = Some(pairs);
                break;
            }
        }
        if b <= 1e-14 * theta_max {
            // Invariant subspace: continue from a fresh direction.
            restarts += 1;
            let mut fresh = start_vector(n, restarts);
            orthogonalize(&mut fresh, &basis);
            let nf = linalg::norm2(&fresh);
            if nf == 0.0 {
                break;
            }
            fresh.iter_mut().for_each(|v| *v /= nf);
            w = fresh;
            b = 0.0;
            beta.push(b);
            q = core::mem::replace(&mut w, vec![0.0; n]);
            continue;
        }
        beta.push(b);
        w.iter_mut().for_each(|v| *v /= b);
        q = core::mem::replace(&mut w, vec![0.0; n]);
    }
    let k = basis.len();
    let ritz = match ritz {
        Some(r) => r,
        None => tridiagonal_eigen(&alpha, &beta_with(&beta, 0.0))?,
    };
    if k < want {
        return Err(SlpError::Eigensolve("Krylov space exhausted before convergence".into()));
    }

    let mut pairs = Vec::with_capacity(m);
    for t in 0..m {
        let i = k - 1 - t;
        let mut u = vec![0.0; n];
        for (j, qj) in basis.iter().enumerate() {
            linalg::axpy(ritz.vectors[j * k + i], qj, &mut u);
        }
        linalg::solve_lower_transpose_in_place(&g, &mut u);
        let zeta = u;
        let bz = system.b.mul_vec(&zeta);
        let norm2 = linalg::dot(&zeta, &bz);
        let kz = system.stiffness_mul(&zeta);
        let lambda = linalg::dot(&zeta, &kz) / norm2;
        let scale = 1.0 / math::sqrt(norm2);
        let zeta: Vec<f64> = zeta.iter().map(|v| v * scale).collect();
        pairs.push(finish_pair(&system.basis, lambda, zeta, &mut warnings, t + 1));
    }
    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    for w in pairs.windows(2) {
        if !(w[0].lambda < w[1].lambda) {
            warnings.push(format!(
                "eigenvalues not strictly increasing near {}",
                w[0].lambda
            ));
        }
    }
    Ok(EigenResult {
        n,
        pairs,
        warnings,
        shift: sigma,
        lanczos_steps: k,
    })
}

fn beta_with(beta: &[f64], last: f64) -> Vec<f64> {
    let mut v = beta.to_vec();
    v.push(last);
    v
}

/// Left traces and sign normalization of one eigenvector.
fn finish_pair(
    basis: &BasisCoefficients,
    lambda: f64,
    mut zeta: Vec<f64>,
    warnings: &mut Vec<String>,
    k: usize,
) -> EigenPair {
    let (mut z, mut zp, mut zh) = (0.0, 0.0, 0.0);
    for (nidx, c) in zeta.iter().enumerate() {
        let (r, rp, u) = basis.left_traces(nidx);
        z += c * r;
        zp += c * rp;
        zh += c * u.unwrap_or(0.0);
    }
    let dirichlet = basis.left_dirichlet();
    let norm = linalg::norm2(&zeta);
    let flip = if dirichlet {
        zp < 0.0
    } else if math::abs(z) < 1e-8 * norm {
        warnings.push(format!(
            "eigenfunction {k}: |z(-1)| tiny, sign fixed by z'(-1) instead"
        ));
        zp < 0.0
    } else {
        z < 0.0
    };
    if flip {
        zeta.iter_mut().for_each(|v| *v = -*v);
        z = -z;
        zp = -zp;
        zh = -zh;
    }
    EigenPair {
        lambda,
        zeta,
        z_left: z,
        zprime_left: zp,
        zhat_left: dirichlet.then_some(zh),
    }
}

/// `z_N(x) = Σ ζ_n R_n(x)` at each point.
pub fn evaluate_eigenfunction(basis: &BasisCoefficients, pair: &EigenPair, xs: &[f64]) -> Vec<f64> {
    let series = LegendreSeries::new(basis.to_legendre(&pair.zeta), 0.0);
    xs.iter().map(|&x| series.eval(x)).collect()
}

/// `‖(A+Q)ζ − λBζ‖₂ / (max(|λ|, 1) ‖Bζ‖₂)`.
pub fn relative_residual(system: &SpectralSystem, pair: &EigenPair) -> f64 {
    let kz = system.stiffness_mul(&pair.zeta);
    let bz = system.b.mul_vec(&pair.zeta);
    let r: Vec<f64> = kz.iter().zip(&bz).map(|(k, b)| k - pair.lambda * b).collect();
    linalg::norm2(&r) / (math::abs(pair.lambda).max(1.0) * linalg::norm2(&bz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_system, PotentialSeries};
    use crate::basis::BoundaryCondition as Bc;
    use crate::expansion::{parse, project_legendre};
    use crate::polyops::{gauss_nodes, QuadratureKind};
    use core::f64::consts::PI;

    fn system(left: Bc, right: Bc, f: &str, g: &str, gamma: f64, n: usize) -> SpectralSystem {
        let pot = PotentialSeries {
            f: project_legendre(&parse(f).unwrap(), 1e-15).unwrap(),
            g: project_legendre(&parse(g).unwrap(), 1e-15).unwrap(),
            gamma,
        }
        .normalized();
        let basis = BasisCoefficients::new(left, right, n + 2).unwrap();
        assemble_system(n, &pot, &basis).unwrap()
    }

    #[test]
    fn free_dirichlet_and_neumann() {
        let s = system(Bc::DIRICHLET, Bc::DIRICHLET, "0", "0", 0.0, 32);
        let r = solve(&s, 3).unwrap();
        assert!((r.pairs[0].lambda - PI * PI / 4.0).abs() < 1e-10);
        let s = system(Bc::NEUMANN, Bc::NEUMANN, "0", "0", 0.0, 32);
        let r = solve(&s, 3).unwrap();
        assert!(r.pairs[0].lambda.abs() < 1e-10);
        assert!((r.pairs[1].lambda - PI * PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn eigenfunction_examples() {
        let s = system(Bc::DIRICHLET, Bc::DIRICHLET, "0", "0", 0.0, 32);
        let r = solve(&s, 2).unwrap();
        let v = evaluate_eigenfunction(&s.basis, &r.pairs[0], &[-1.0, 0.0]);
        assert_eq!(v[0], 0.0);
        // cos(πx/2) has unit L² norm on (-1, 1); positive slope at -1 fixes the sign.
        assert!((v[1] - 1.0).abs() < 1e-8);
        let rule = gauss_nodes(64, QuadratureKind::Legendre).unwrap();
        for p in &r.pairs {
            let vals = evaluate_eigenfunction(&s.basis, p, &rule.nodes);
            let norm: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| w * v * v).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_dense_solver() {
        let s = system(
            Bc::new(1.0, 1.0).unwrap(),
            Bc::new(1.0, -1.0).unwrap(),
            "cos(2*pi*x)",
            "10*(2-exp(-x))",
            0.5,
            40,
        );
        let r = solve(&s, 12).unwrap();
        let k = DenseMatrix::from_fn(40, 40, |i, j| s.q.get(i, j) + if i == j { s.a[i] } else { 0.0 });
        let (vals, _) = dense_generalized_eigen(&k, &s.b.to_dense()).unwrap();
        for (p, v) in r.pairs.iter().zip(&vals) {
            assert!((p.lambda - v).abs() < 1e-9 * v.abs().max(1.0), "{} {}", p.lambda, v);
        }
    }

    #[test]
    fn invariants_hold() {
        let cases = [
            system(Bc::new(1.0, 1.0).unwrap(), Bc::new(1.0, -1.0).unwrap(), "cos(2*pi*x)", "10*(2-exp(-x))", 0.25, 256),
            system(Bc::DIRICHLET, Bc::new(1.0, 0.0).unwrap(), "2*x^2", "5/((1+x)^2+1)", 1.5, 200),
            system(Bc::DIRICHLET, Bc::DIRICHLET, "log(3+x)", "cos(4*pi*x)", 2.0, 128),
            system(Bc::NEUMANN, Bc::DIRICHLET, "2*x^2", "5/((1+x)^2+1)", 0.4, 512),
        ];
        for s in &cases {
            let r = solve(s, 10).unwrap();
            for (i, p) in r.pairs.iter().enumerate() {
                let res = relative_residual(s, p);
                assert!(res < 1e-10, "residual {res}");
                let bp = s.b.mul_vec(&p.zeta);
                assert!((linalg::dot(&p.zeta, &bp) - 1.0).abs() < 1e-12);
                for q in &r.pairs[..i] {
                    assert!(linalg::dot(&q.zeta, &bp).abs() < 1e-10);
                }
                if s.basis.left_dirichlet() {
                    assert!(p.zprime_left > 0.0);
                } else {
                    assert!(p.z_left > 0.0);
                }
            }
            assert!(r.pairs.windows(2).all(|w| w[0].lambda < w[1].lambda));
        }
    }

    #[test]
    fn smooth_problems_converge_exponentially() {
        let run = |n| {
            let s = system(Bc::new(1.0, 1.0).unwrap(), Bc::new(1.0, -1.0).unwrap(), "cos(2*pi*x)", "10*(2-exp(-x))", 0.0, n);
            solve(&s, 10).unwrap()
        };
        let (a, b) = (run(64), run(128));
        for (p, q) in a.pairs.iter().zip(&b.pairs) {
            assert!((p.lambda - q.lambda).abs() < 1e-12 * q.lambda.abs().max(1.0) * 10.0);
        }
    }

    #[test]
    fn rejects_too_many_pairs() {
        let s = system(Bc::DIRICHLET, Bc::DIRICHLET, "0", "0", 0.0, 4);
        assert!(matches!(solve(&s, 5), Err(SlpError::TooManyEigenpairs { .. })));
        assert_eq!(solve(&s, 4).unwrap().pairs.len(), 4);
    }
}
