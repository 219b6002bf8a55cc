//! Dense and banded kernels used by the assembly and eigensolver.
//!
//! Everything here is single-threaded and works on row-major storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Keep only the leading `rows × cols` block, reusing the allocation.
    pub fn truncate(&mut self, rows: usize, cols: usize) {
        assert!(rows <= self.rows && cols <= self.cols);
        for i in 0..rows {
            self.data.copy_within(i * self.cols..i * self.cols + cols, i * cols);
        }
        self.data.truncate(rows * cols);
        self.data.shrink_to_fit();
        self.rows = rows;
        self.cols = cols;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }

    /// `max |a_ij - a_ji|` over a square matrix.
    pub fn asymmetry(&self) -> f64 {
        debug_assert_eq!(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max(math::abs(self.get(i, j) - self.get(j, i)));
            }
        }
        worst
    }

    /// Replace a square matrix by `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        debug_assert_eq!(self.rows, self.cols);
        let n = self.rows;
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    math::sqrt(dot(x, x))
}

/// Pivot failure in a Cholesky factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

const CHOLESKY_BLOCK: usize = 48;

/// In-place Cholesky `A = L Lᵀ` of a symmetric positive definite matrix.
///
/// Only the lower triangle of `a` is read; on success it holds `L` and the
/// strict upper triangle is zeroed. Rows are processed in blocks so that each
/// finished row of `L` is reused from cache by a whole block of target rows.
pub fn cholesky_in_place(a: &mut DenseMatrix) -> Result<(), NotPositiveDefinite> {
    let n = a.rows;
    assert_eq!(n, a.cols, "cholesky needs a square matrix");
    let mut i0 = 0;
    while i0 < n {
        let i1 = (i0 + CHOLESKY_BLOCK).min(n);
        // Contributions of all finished rows j < i0 to the block rows.
        for j in 0..i0 {
            let (head, tail) = a.data.split_at_mut(i0 * n);
            let lj = &head[j * n..j * n + j];
            let ljj = head[j * n + j];
            for i in i0..i1 {
                let row = &mut tail[(i - i0) * n..(i - i0 + 1) * n];
                let s = row[j] - dot(&row[..j], lj);
                row[j] = s / ljj;
            }
        }
        // Triangular part inside the block.
        for i in i0..i1 {
            for j in i0..i {
                let (head, tail) = a.data.split_at_mut(i * n);
                let lj = &head[j * n..j * n + j];
                let ljj = head[j * n + j];
                let row = &mut tail[..n];
                let s = row[j] - dot(&row[..j], lj);
                row[j] = s / ljj;
            }
            let row = &mut a.data[i * n..(i + 1) * n];
            let d = row[i] - dot(&row[..i], &row[..i]);
            if !(d > 0.0) || !d.is_finite() {
                return Err(NotPositiveDefinite { pivot: i });
            }
            row[i] = math::sqrt(d);
            for v in &mut row[i + 1..] {
                *v = 0.0;
            }
        }
        i0 = i1;
    }
    Ok(())
}

/// Solve `L y = b` in place for lower-triangular `L`.
pub fn solve_lower_in_place(l: &DenseMatrix, b: &mut [f64]) {
    let n = l.rows;
    for i in 0..n {
        let row = l.row(i);
        let s = b[i] - dot(&row[..i], &b[..i]);
        b[i] = s / row[i];
    }
}

/// Solve `Lᵀ x = b` in place for lower-triangular `L`.
pub fn solve_lower_transpose_in_place(l: &DenseMatrix, b: &mut [f64]) {
    let n = l.rows;
    for j in (0..n).rev() {
        let row = l.row(j);
        let xj = b[j] / row[j];
        b[j] = xj;
        axpy(-xj, &row[..j], &mut b[..j]);
    }
}

/// Symmetric matrix with half-bandwidth two, stored by diagonals.
///
/// `diag[i] = b_{ii}`, `off1[i] = b_{i,i+1}`, `off2[i] = b_{i,i+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPentadiagonal {
    pub diag: Vec<f64>,
    pub off1: Vec<f64>,
    pub off2: Vec<f64>,
}

impl SymPentadiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.diag[lo],
            1 => self.off1[lo],
            2 => self.off2[lo],
            _ => 0.0,
        }
    }

    /// `y = B x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i + 1 < n {
                s += self.off1[i] * x[i + 1];
            }
            if i + 2 < n {
                s += self.off2[i] * x[i + 2];
            }
            if i >= 1 {
                s += self.off1[i - 1] * x[i - 1];
            }
            if i >= 2 {
                s += self.off2[i - 2] * x[i - 2];
            }
            y[i] = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ B y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// Banded Cholesky; returns the three diagonals of `L` (main, first, second sub).
    pub fn cholesky(&self) -> Result<[Vec<f64>; 3], NotPositiveDefinite> {
        let n = self.dim();
        let mut l0 = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            // l2[i] = L_{i,i-2}, l1[i] = L_{i,i-1}
            if i >= 2 {
                l2[i] = self.off2[i - 2] / l0[i - 2];
            }
            if i >= 1 {
                let mut s = self.off1[i - 1];
                if i >= 2 {
                    s -= l2[i] * l1[i - 1];
                }
                l1[i] = s / l0[i - 1];
            }
            let d = self.diag[i] - l1[i] * l1[i] - l2[i] * l2[i];
            if !(d > 0.0) {
                return Err(NotPositiveDefinite { pivot: i });
            }
            l0[i] = math::sqrt(d);
        }
        Ok([l0, l1, l2])
    }
}

/// Failure of the implicit QL iteration to converge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoConvergence;

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL.
///
/// `diag` (length n) and `sub` (length n, `sub[i]` couples `i` and `i+1`,
/// last entry ignored) are overwritten; on return `diag` holds the eigenvalues
/// sorted ascending. `z` is a row-major `rows × n` block that gets the Givens
/// rotations applied to its columns: start from the identity for the full
/// eigenvector matrix, or from `e_0ᵀ` (one row) to track only first components.
pub fn tridiagonal_ql(
    diag: &mut [f64],
    sub: &mut [f64],
    z: &mut [f64],
    rows: usize,
) -> Result<(), NoConvergence> {
    let n = diag.len();
    assert!(sub.len() >= n);
    assert_eq!(z.len(), rows * n);
    if n == 0 {
        return Ok(());
    }
    sub[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(diag[m]) + math::abs(diag[m + 1]);
                if math::abs(sub[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(NoConvergence);
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * sub[l]);
            let mut r = math::hypot(g, 1.0);
            g = diag[m] - diag[l] + sub[l] / (g + math::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * sub[i];
                let b = c * sub[i];
                r = math::hypot(f, g);
                sub[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    sub[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                for k in 0..rows {
                    let row = &mut z[k * n..(k + 1) * n];
                    let t = row[i + 1];
                    row[i + 1] = s * row[i] + c * t;
                    row[i] = c * row[i] - s * t;
                }
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    // Selection sort keeps the column permutation cheap to apply.
    for i in 0..n {
        let mut k = i;
        for j in i + 1..n {
            if diag[j] < diag[k] {
                k = j;
            }
        }
        if k != i {
            diag.swap(i, k);
            for r in 0..rows {
                z.swap(r * n + i, r * n + k);
            }
        }
    }
    Ok(())
}

/// All eigenpairs of a small dense symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and the eigenvectors as columns of a dense
/// matrix. Intended for matrices of at most a few dozen rows.
pub fn jacobi_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.rows;
    let mut m = a.clone();
    let mut v = DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if off <= 1e-300 || math::sqrt(off) <= 1e-17 * m.max_abs() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = math::copysign(1.0, theta) / (math::abs(theta) + math::hypot(theta, 1.0));
                let c = 1.0 / math::hypot(t, 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    (values, vectors)
}
