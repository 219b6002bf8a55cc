//! Galerkin matrices `A_N` (diagonal), `B_N` (pentadiagonal) and `Q_N`.
//!
//! `Q_N` is built from column recurrences in the Legendre basis (`γ < 1`) or
//! in the Jacobi `P^{(0,1)}` basis after factoring `R_n = (1+x) U_n`
//! (`γ ∈ [1, 2]`, Dirichlet condition at `x = -1`).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::BasisCoefficients;
use crate::error::SlpError;
use crate::expansion::{self, LegendreSeries, OperatorKind, TridiagonalOperator};
use crate::linalg::{DenseMatrix, SymPentadiagonal};
use crate::math;
use crate::polyops;

/// Entries of `B` coupling the trial space to `R_N` and `R_{N+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BExtended {
    /// `b_{N,N-2}`
    pub n_nm2: f64,
    /// `b_{N,N-1}`
    pub n_nm1: f64,
    /// `b_{N+1,N-1}`
    pub np1_nm1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssemblyPath {
    /// `Q = Rᵀ Q̂ R` with Legendre-basis recurrences.
    Regular,
    /// `Q = Rᵀ F̂ R + R̃ᵀ G̃ R̃` with the Jacobi-basis recurrence for `G̃`.
    Singular,
}

/// `f` and `g` of a problem after Legendre projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSeries {
    pub f: LegendreSeries,
    pub g: LegendreSeries,
    pub gamma: f64,
}

impl PotentialSeries {
    /// Fold `g` into `f` when `γ = 0`, where the split is immaterial.
    pub fn normalized(mut self) -> Self {
        if self.gamma == 0.0 && !self.g.is_zero() {
            self.f = self.f.add(&self.g);
            self.g = LegendreSeries::new(vec![0.0], self.g.tol);
        }
        self
    }
}

/// Everything the eigensolver and the corrections need for one `N`.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: SymPentadiagonal,
    pub b_extended: BExtended,
    pub q: DenseMatrix,
    pub path: AssemblyPath,
    /// `max|Q̂ - Q̂ᵀ| / max|Q̂|` of the raw recurrence output (`G̃` on the singular path).
    pub raw_asymmetry: f64,
    /// Basis triples for indices `0..N+2`.
    pub basis: BasisCoefficients,
}

impl SpectralSystem {
    /// `((A + Q) v)`.
    pub fn stiffness_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.q.mul_vec(v);
        for (o, (a, x)) in out.iter_mut().zip(self.a.iter().zip(v)) {
            *o += a * x;
        }
        out
    }

    /// Half-bandwidth of `Q` at the relative threshold `tol`.
    pub fn q_bandwidth(&self, tol: f64) -> usize {
        let cut = tol * self.q.max_abs();
        let mut bw = 0;
        for i in 0..self.n {
            for (j, v) in self.q.row(i).iter().enumerate() {
                if math::abs(*v) > cut {
                    bw = bw.max(i.abs_diff(j));
                }
            }
        }
        bw
    }
}

/// `a_nn = -2(2n+3) ξ_n θ_n`.
pub fn assemble_a(n: usize, basis: &BasisCoefficients) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let [xi, _, theta] = basis.triple(k);
            -2.0 * (2.0 * k as f64 + 3.0) * xi * theta
        })
        .collect()
}

#[inline]
fn legendre_mass(j: usize) -> f64 {
    2.0 / (2.0 * j as f64 + 1.0)
}

/// `⟨R_m, R_n⟩` from the banded factorization.
pub fn basis_gram(basis: &BasisCoefficients, m: usize, n: usize) -> f64 {
    let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
    if hi - lo > 2 {
        return 0.0;
    }
    let (tl, th) = (basis.triple(lo), basis.triple(hi));
    (hi..=lo + 2)
        .map(|j| legendre_mass(j) * tl[j - lo] * th[j - hi])
        .sum()
}

/// Pentadiagonal `B_N` and the extended entries; `basis` must cover `0..N+2`.
pub fn assemble_b(n: usize, basis: &BasisCoefficients) -> (SymPentadiagonal, BExtended) {
    assert!(basis.len() >= n + 2, "basis must cover indices up to N+1");
    let diag = (0..n).map(|k| basis_gram(basis, k, k)).collect();
    let off1 = (0..n)
        .map(|k| if k + 1 < n { basis_gram(basis, k, k + 1) } else { 0.0 })
        .collect();
    let off2 = (0..n)
        .map(|k| if k + 2 < n { basis_gram(basis, k, k + 2) } else { 0.0 })
        .collect();
    let ext = BExtended {
        n_nm2: if n >= 2 { basis_gram(basis, n, n - 2) } else { 0.0 },
        n_nm1: basis_gram(basis, n, n - 1),
        np1_nm1: basis_gram(basis, n + 1, n - 1),
    };
    (SymPentadiagonal { diag, off1, off2 }, ext)
}

/// Moments of the singular weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    /// `∫ (1+x)^{-γ} P_m`, `γ ∈ [0, 1)`.
    Legendre,
    /// `∫ (1+x)^{2-γ} P_m^{(0,1)}`, `γ ∈ [1, 2]`.
    Jacobi01,
}

/// First `count` moments by the closed form, accumulated as a product of
/// consecutive ratios so no Pochhammer symbol is formed explicitly.
pub fn singular_moments(kind: MomentKind, gamma: f64, count: usize) -> Result<Vec<f64>, SlpError> {
    let (first, num, den) = match kind {
        MomentKind::Legendre => {
            if !(0.0..1.0).contains(&gamma) {
                return Err(SlpError::InvalidArgument("Legendre moments need gamma in [0, 1)"));
            }
            (math::powf(2.0, 1.0 - gamma) / (1.0 - gamma), gamma, 2.0 - gamma)
        }
        MomentKind::Jacobi01 => {
            if !(1.0..=2.0).contains(&gamma) {
                return Err(SlpError::InvalidArgument("Jacobi moments need gamma in [1, 2]"));
            }
            (math::powf(2.0, 3.0 - gamma) / (3.0 - gamma), gamma - 1.0, 4.0 - gamma)
        }
    };
    let mut out = Vec::with_capacity(count);
    let mut v = first;
    for m in 0..count {
        out.push(v);
        let mf = m as f64;
        v *= -(num + mf) / (den + mf);
    }
    Ok(out)
}

/// Fill a square matrix from the column recurrence of the given operator.
///
/// `seed` holds column 0 for rows `0..S` with `S ≥ 2·dim − 1`. Column `n` is
/// written into row `n` of the result (the matrix is symmetric in exact
/// arithmetic).
fn column_recurrence(seed: Vec<f64>, dim: usize, kind: OperatorKind) -> DenseMatrix {
    let s = seed.len();
    assert!(s + 1 >= 2 * dim, "seed too short for the recurrence");
    let op = TridiagonalOperator::new(kind, s);
    let mut out = DenseMatrix::zeros(dim, dim);
    let mut prev = vec![0.0; s];
    let mut cur = seed;
    let mut next = vec![0.0; s];
    for n in 0..dim {
        out.row_mut(n).copy_from_slice(&cur[..dim]);
        if n + 1 == dim {
            break;
        }
        let len = s - n - 1;
        op.apply(&cur, &mut next, len + 1);
        let nf = n as f64;
        match kind {
            OperatorKind::Legendre => {
                let a = (2.0 * nf + 1.0) / (nf + 1.0);
                let b = nf / (nf + 1.0);
                for m in 0..len {
                    next[m] = a * next[m] - b * prev[m];
                }
            }
            OperatorKind::Jacobi01 => {
                let (lo, mid, hi) = polyops::jacobi01_recurrence(n);
                for m in 0..len {
                    next[m] = (next[m] - mid * cur[m] - lo * prev[m]) / hi;
                }
            }
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
    }
    out
}

fn relative_asymmetry(m: &DenseMatrix) -> f64 {
    let scale = m.max_abs();
    if scale == 0.0 {
        0.0
    } else {
        m.asymmetry() / scale
    }
}

/// `F̂_{mn} = ∫ f P_m P_n` restricted to `|m − n| ≤ L`, `L + 1` the series length.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedGram {
    pub dim: usize,
    pub half_band: usize,
    data: Vec<f64>,
}

impl BandedGram {
    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        if m.abs_diff(n) > self.half_band || m >= self.dim || n >= self.dim {
            return 0.0;
        }
        self.data[n * (2 * self.half_band + 1) + (m + self.half_band - n)]
    }
}

/// Banded `F̂` of dimension `dim`, symmetrized.
pub fn assemble_fhat(f: &LegendreSeries, dim: usize) -> BandedGram {
    let l = f.len() - 1;
    let width = 2 * l + 1;
    let rows = dim + l + 2;
    let op = TridiagonalOperator::new(OperatorKind::Legendre, rows);
    let mut data = vec![0.0; dim * width];
    let mut prev = vec![0.0; rows];
    let mut cur = vec![0.0; rows];
    let mut next = vec![0.0; rows];
    for (m, c) in f.coeffs.iter().enumerate() {
        cur[m] = legendre_mass(m) * c;
    }
    for n in 0..dim {
        for k in 0..width {
            if let Some(m) = (n + k).checked_sub(l) {
                if m < dim {
                    data[n * width + k] = cur[m];
                }
            }
        }
        if n + 1 == dim {
            break;
        }
        next.fill(0.0);
        let lo = (n + 1).saturating_sub(l);
        let hi = (n + 1 + l).min(rows - 1);
        let nf = n as f64;
        let (a, b) = ((2.0 * nf + 1.0) / (nf + 1.0), nf / (nf + 1.0));
        for m in lo..=hi {
            let (hl, _, hu) = op.row(m);
            let mut hv = 0.0;
            if m > 0 {
                hv += hl * cur[m - 1];
            }
            if m + 1 < rows {
                hv += hu * cur[m + 1];
            }
            next[m] = a * hv - b * prev[m];
        }
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
    }
    let mut g = BandedGram {
        dim,
        half_band: l,
        data,
    };
    for n in 0..dim {
        for m in n + 1..=(n + l).min(dim - 1) {
            let v = 0.5 * (g.get(m, n) + g.get(n, m));
            g.data[n * width + (m + l - n)] = v;
            g.data[m * width + (n + l - m)] = v;
        }
    }
    g
}

/// `Ĝ_{mn} = ∫ (1+x)^{-γ} g P_m P_n` for `m, n < dim`, before symmetrization.
fn ghat_raw(g: &LegendreSeries, gamma: f64, dim: usize) -> Result<DenseMatrix, SlpError> {
    let s = 2 * dim;
    let size = s + g.len() + 8;
    let moments = singular_moments(MomentKind::Legendre, gamma, size)?;
    let op = TridiagonalOperator::new(OperatorKind::Legendre, size);
    let seed = expansion::apply_operator_function(g, &op, &moments, s)?;
    Ok(column_recurrence(seed, dim, OperatorKind::Legendre))
}

/// Symmetric `Q̂_N = F̂_N + Ĝ_N` of dimension `N + 2` for `γ ∈ [0, 1)`, and the
/// relative asymmetry of the raw recurrence output.
pub fn assemble_qhat_regular(
    n: usize,
    f: &LegendreSeries,
    g: &LegendreSeries,
    gamma: f64,
) -> Result<(DenseMatrix, f64), SlpError> {
    if gamma >= 1.0 {
        return Err(SlpError::InvalidArgument("gamma >= 1 uses the singular path"));
    }
    let dim = n + 2;
    let mut q = if gamma == 0.0 || g.is_zero() {
        DenseMatrix::zeros(dim, dim)
    } else {
        ghat_raw(g, gamma, dim)?
    };
    let gamma_zero_g = if gamma == 0.0 && !g.is_zero() { Some(f.add(g)) } else { None };
    let fhat = assemble_fhat(gamma_zero_g.as_ref().unwrap_or(f), dim);
    for i in 0..dim {
        let lo = i.saturating_sub(fhat.half_band);
        let hi = (i + fhat.half_band).min(dim - 1);
        for j in lo..=hi {
            q.add_to(i, j, fhat.get(i, j));
        }
    }
    let asym = relative_asymmetry(&q);
    q.symmetrize();
    Ok((q, asym))
}

/// Symmetric `G̃_N` of dimension `N + 1` for `γ ∈ [1, 2]`, and the relative
/// asymmetry of the raw recurrence output.
pub fn assemble_gtilde_singular(
    n: usize,
    g: &LegendreSeries,
    gamma: f64,
) -> Result<(DenseMatrix, f64), SlpError> {
    if !(1.0..=2.0).contains(&gamma) {
        return Err(SlpError::InvalidArgument("singular path needs gamma in [1, 2]"));
    }
    let dim = n + 1;
    let s = 2 * dim;
    let size = s + g.len() + 8;
    let moments = singular_moments(MomentKind::Jacobi01, gamma, size)?;
    let op = TridiagonalOperator::new(OperatorKind::Jacobi01, size);
    let seed = expansion::apply_operator_function(g, &op, &moments, s)?;
    let mut gt = column_recurrence(seed, dim, OperatorKind::Jacobi01);
    let asym = relative_asymmetry(&gt);
    gt.symmetrize();
    Ok((gt, asym))
}

/// In place `M ← Cᵀ M C` for a banded `C` of `width` entries per column, then
/// keep the leading `n × n` block.
fn congruence_in_place(m: &mut DenseMatrix, n: usize, columns: impl Fn(usize) -> [f64; 3], width: usize) {
    let dim = m.rows();
    for i in 0..dim {
        let row = m.row_mut(i);
        for k in 0..n {
            let c = columns(k);
            let mut s = 0.0;
            for (t, ct) in c.iter().enumerate().take(width) {
                s += ct * row[k + t];
            }
            row[k] = s;
        }
    }
    for k in 0..n {
        let c = columns(k);
        let (head, tail) = m.as_mut_slice().split_at_mut((k + 1) * dim);
        let row = &mut head[k * dim..k * dim + n];
        for v in row.iter_mut() {
            *v *= c[0];
        }
        for t in 1..width {
            if c[t] == 0.0 {
                continue;
            }
            let other = &tail[(t - 1) * dim..(t - 1) * dim + n];
            for (v, o) in row.iter_mut().zip(other) {
                *v += c[t] * o;
            }
        }
    }
    m.truncate(n, n);
}

/// Symmetric `Q_N`; returns the matrix, the path taken and the raw asymmetry.
pub fn assemble_q(
    n: usize,
    potential: &PotentialSeries,
    basis: &BasisCoefficients,
) -> Result<(DenseMatrix, AssemblyPath, f64), SlpError> {
    let gamma = potential.gamma;
    if !(0.0..=2.0).contains(&gamma) {
        return Err(SlpError::Unsupported(format!("exponent {gamma} outside [0, 2]")));
    }
    let singular = gamma >= 1.0 && !potential.g.is_zero();
    if !singular {
        // With g ≡ 0 the exponent is irrelevant.
        let gamma = if gamma < 1.0 { gamma } else { 0.0 };
        let (mut q, asym) = assemble_qhat_regular(n, &potential.f, &potential.g, gamma)?;
        congruence_in_place(&mut q, n, |k| basis.triple(k), 3);
        q.symmetrize();
        return Ok((q, AssemblyPath::Regular, asym));
    }
    if !basis.left_dirichlet() {
        return Err(SlpError::Assembly(
            "singular path requires a Dirichlet condition at x = -1".into(),
        ));
    }
    let (mut q, asym) = assemble_gtilde_singular(n, &potential.g, gamma)?;
    congruence_in_place(
        &mut q,
        n,
        |k| {
            let [xi, _, theta] = basis.triple(k);
            [xi, theta, 0.0]
        },
        2,
    );
    if !potential.f.is_zero() {
        let fhat = assemble_fhat(&potential.f, n + 2);
        let reach = fhat.half_band + 2;
        for m in 0..n {
            let cm = basis.triple(m);
            for k in m.saturating_sub(reach)..(m + reach + 1).min(n) {
                let ck = basis.triple(k);
                let mut s = 0.0;
                for (i, ci) in cm.iter().enumerate() {
                    for (j, cj) in ck.iter().enumerate() {
                        s += ci * fhat.get(m + i, k + j) * cj;
                    }
                }
                q.add_to(m, k, s);
            }
        }
    }
    q.symmetrize();
    Ok((q, AssemblyPath::Singular, asym))
}

/// Assemble the full system for dimension `n`.
pub fn assemble_system(
    n: usize,
    potential: &PotentialSeries,
    basis: &BasisCoefficients,
) -> Result<SpectralSystem, SlpError> {
    if n == 0 {
        return Err(SlpError::InvalidArgument("N must be at least 1"));
    }
    if basis.len() < n + 2 {
        return Err(SlpError::InvalidArgument("basis must cover indices up to N+1"));
    }
    let a = assemble_a(n, basis);
    let (b, b_extended) = assemble_b(n, basis);
    let (q, path, raw_asymmetry) = assemble_q(n, potential, basis)?;
    if !q.as_slice().iter().all(|v| v.is_finite()) {
        return Err(SlpError::Assembly("non-finite entries in Q".into()));
    }
    Ok(SpectralSystem {
        n,
        a,
        b,
        b_extended,
        q,
        path,
        raw_asymmetry,
        basis: basis.clone(),
    })
}
