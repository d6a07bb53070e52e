//! Dense complex linear algebra for the small matrices that occur here
//! (at most 16x16).
//!
//! Hermitian eigenproblems use cyclic Jacobi rotations and singular values
//! come from one-sided (Hestenes) Jacobi. Both are slow asymptotically but
//! accurate to working precision on tiny, possibly degenerate inputs.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting inconsistent sizes and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real diagonal matrix.
    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Column matrix `v w^†`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mat_vec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A B - B A`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^†|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U^† U - 1|`; infinite for non-square input.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary(defect))
        }
    }

    /// Kronecker product `self ⊗ rhs` with row-major composite indices.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// `<a|b> = Σ conj(a_k) b_k`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Only the Hermitian part of the input is used, so callers should validate
/// Hermiticity themselves when it matters.
pub fn eigh(a: &ComplexMatrix) -> HermitianEigen {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.rows();
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / r;
                let zeta = (aqq - app) / (2.0 * r);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * g_pp + akq * g_qp;
                    m[(k, q)] = akp * g_pq + akq * g_qq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    m[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Thin singular value decomposition `A = U diag(s) V^†`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Left factor with orthonormal columns.
    pub u: ComplexMatrix,
    /// Descending singular values.
    pub s: Vec<f64>,
    /// Right factor with orthonormal columns. Both factors are unitary for
    /// square input.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.s.len();
        let us = ComplexMatrix::from_fn(self.u.rows(), k, |i, j| self.u[(i, j)] * self.s[j]);
        us.matmul(&self.v.adjoint())
    }

    /// Count of singular values above `rel_tol` times the largest one, with an
    /// absolute floor below which everything counts as zero.
    pub fn rank(&self, rel_tol: f64, abs_floor: f64) -> usize {
        let largest = self.s.first().copied().unwrap_or(0.0);
        let cutoff = (rel_tol * largest).max(abs_floor);
        self.s.iter().filter(|&&x| x > cutoff).count()
    }
}

/// One-sided Jacobi SVD. Works for any shape; wide inputs are handled through
/// the adjoint.
pub fn svd(a: &ComplexMatrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (m, n) = (a.rows(), a.cols());
    // Work on columns.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norm_sqr(&cols[p]);
                let beta = norm_sqr(&cols[q]);
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let rot = phase.conj();
                rotate_columns(&mut cols, p, q, c, s, rot);
                rotate_columns(&mut vcols, p, q, c, s, rot);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| norm_sqr(c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let largest = s.first().copied().unwrap_or(0.0);

    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        if s[k] > largest * 1e-13 && s[k] > 1e-300 {
            ucols.push(cols[j].iter().map(|z| z / s[k]).collect());
        } else {
            ucols.push(Vec::new());
        }
    }
    complete_orthonormal(&mut ucols, m);

    let u = ComplexMatrix::from_fn(m, n, |i, k| ucols[k][i]);
    let v = ComplexMatrix::from_fn(n, n, |i, k| vcols[order[k]][i]);
    Svd { u, s, v }
}

fn rotate_columns(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, rot: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let a_p = *xp;
        let a_q = *xq * rot;
        *xp = a_p * c - a_q * s;
        *xq = a_p * s + a_q * c;
    }
}

/// Fills the empty entries of `cols` with unit vectors orthogonal to all the
/// others (Gram-Schmidt against the standard basis).
fn complete_orthonormal(cols: &mut [Vec<C64>], dim: usize) {
    let mut candidate = 0;
    for k in 0..cols.len() {
        if !cols[k].is_empty() {
            continue;
        }
        loop {
            assert!(candidate < dim, "cannot complete orthonormal set");
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[candidate] = C64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for other in cols.iter().filter(|c| !c.is_empty()) {
                    let proj = inner(other, &e);
                    for (x, o) in e.iter_mut().zip(other) {
                        *x -= proj * o;
                    }
                }
            }
            let nrm = norm_sqr(&e).sqrt();
            if nrm > 1e-6 {
                cols[k] = e.into_iter().map(|z| z / nrm).collect();
                break;
            }
        }
    }
}

/// Householder QR of a square matrix: `A = Q R`, `Q` unitary, `R` upper
/// triangular.
pub fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    assert!(a.is_square(), "qr needs a square matrix");
    let n = a.rows();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let x: Vec<C64> = (k..n).map(|i| r[(i, k)]).collect();
        let xnorm = norm_sqr(&x).sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut v = x;
        v[0] += phase * xnorm;
        let vnorm = norm_sqr(&v).sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // R <- (1 - 2 v v^†) R on rows k.., Q <- Q (1 - 2 v v^†).
        for j in 0..n {
            let dot: C64 = (k..n).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..n {
                r[(i, j)] -= v[i - k] * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: C64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            for j in k..n {
                q[(i, j)] -= dot * v[j - k].conj() * 2.0;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            r[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    (q, r)
}

/// `exp(i H)` for Hermitian `H`, through its eigen-decomposition.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let eig = eigh(h);
    let phases: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, l)).collect();
    let vd = ComplexMatrix::from_fn(h.rows(), h.cols(), |i, j| eig.vectors[(i, j)] * phases[j]);
    vd.matmul(&eig.vectors.adjoint())
}

/// `exp(i H)` together with its directional derivatives along each Hermitian
/// direction in `dirs`, via the Daleckii-Krein divided-difference formula.
pub fn expm_i_hermitian_with_derivatives(
    h: &ComplexMatrix,
    dirs: &[ComplexMatrix],
) -> (ComplexMatrix, Vec<ComplexMatrix>) {
    let n = h.rows();
    let eig = eigh(h);
    let lam = &eig.values;
    let f: Vec<C64> = lam.iter().map(|&l| C64::from_polar(1.0, l)).collect();
    let vecs = &eig.vectors;
    let vh = vecs.adjoint();
    let u = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * f[j]).matmul(&vh);

    let divided = ComplexMatrix::from_fn(n, n, |j, k| {
        let d = lam[j] - lam[k];
        if d.abs() < 1e-9 {
            // derivative of e^{ix} at the midpoint, accurate to O(d^2)
            C64::i() * C64::from_polar(1.0, 0.5 * (lam[j] + lam[k]))
        } else {
            (f[j] - f[k]) / d
        }
    });
    let derivs = dirs
        .iter()
        .map(|e| {
            let rotated = vh.matmul(e).matmul(vecs);
            let hadamard = ComplexMatrix::from_fn(n, n, |j, k| rotated[(j, k)] * divided[(j, k)]);
            vecs.matmul(&hadamard).matmul(&vh)
        })
        .collect();
    (u, derivs)
}

/// LU factorization with partial pivoting of a real square matrix.
#[derive(Clone, Debug)]
pub struct RealLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl RealLu {
    /// Factorizes the row-major `n x n` matrix `a`. Returns `None` when a
    /// pivot vanishes exactly.
    pub fn new(n: usize, a: &[f64]) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
                .unwrap();
            if lu[pivot * n + k] == 0.0 {
                return None;
            }
            if pivot != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / d;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        Some(Self { n, lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i]).product::<f64>() * self.sign
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Determinant of a small real square matrix (row-major).
pub fn real_det(n: usize, a: &[f64]) -> f64 {
    RealLu::new(n, a).map_or(0.0, |lu| lu.det())
}

/// Singular values of a real row-major matrix, descending.
pub fn real_singular_values(rows: usize, cols: usize, a: &[f64]) -> Vec<f64> {
    let m = ComplexMatrix::from_fn(rows, cols, |i, j| C64::new(a[i * cols + j], 0.0));
    svd(&m).s
}

/// Pairwise (cascade) summation: the result depends only on the input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n, n);
        (&a + &a.adjoint()).scale_real(0.5)
    }

    #[test]
    fn eigh_two_by_two_by_hand() {
        // [[0.5, 0.6], [0.6, 0.5]] has eigenvalues -0.1 and 1.1
        let m = ComplexMatrix::from_vec(2, 2, vec![c(0.5, 0.0), c(0.6, 0.0), c(0.6, 0.0), c(0.5, 0.0)]).unwrap();
        let e = eigh(&m);
        assert!((e.values[0] + 0.1).abs() < 1e-14);
        assert!((e.values[1] - 1.1).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=16 {
            let h = random_hermitian(&mut rng, n);
            let e = eigh(&h);
            assert!(e.vectors.unitarity_defect() < 1e-12);
            let back = e
                .vectors
                .matmul(&ComplexMatrix::diag_real(&e.values))
                .matmul(&e.vectors.adjoint());
            assert!(back.max_abs_diff(&h) < 1e-12, "n = {n}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigh_degenerate_spectrum() {
        let h = ComplexMatrix::diag_real(&[2.0, 2.0, -1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (q, _) = qr(&random_matrix(&mut rng, 4, 4));
        let rotated = q.matmul(&h).matmul(&q.adjoint());
        let e = eigh(&rotated);
        for (got, want) in e.values.iter().zip([-1.0, 2.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_reconstructs_and_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, n) in [(1, 1), (2, 2), (3, 3), (4, 4), (5, 3), (3, 5), (16, 16)] {
            let a = random_matrix(&mut rng, m, n);
            let d = svd(&a);
            assert!(d.reconstruct().max_abs_diff(&a) < 1e-12, "{m}x{n}");
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
            if m >= n {
                assert!(d.v.unitarity_defect() < 1e-12);
            } else {
                assert!(d.u.unitarity_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_rank_deficient_square_gives_unitary_u() {
        let v = vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.0, 1.0)];
        let w = vec![c(0.2, 0.0), c(1.0, -1.0), c(0.4, 0.1)];
        let a = ComplexMatrix::outer(&v, &w);
        let d = svd(&a);
        assert_eq!(d.rank(1e-8, 1e-14), 1);
        assert!(d.u.unitarity_defect() < 1e-12);
        assert!(d.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn svd_of_zero_matrix() {
        let d = svd(&ComplexMatrix::zeros(3, 3));
        assert_eq!(d.s, vec![0.0; 3]);
        assert_eq!(d.rank(1e-8, 1e-12), 0);
        assert!(d.u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn qr_factors_are_unitary_and_triangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=8 {
            let a = random_matrix(&mut rng, n, n);
            let (q, r) = qr(&a);
            assert!(q.unitarity_defect() < 1e-13);
            assert!(q.matmul(&r).max_abs_diff(&a) < 1e-13);
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(r[(i, j)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn exponential_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3, 4] {
            let h = random_hermitian(&mut rng, n);
            let e = random_hermitian(&mut rng, n);
            let (u, d) = expm_i_hermitian_with_derivatives(&h, std::slice::from_ref(&e));
            assert!(u.max_abs_diff(&expm_i_hermitian(&h)) < 1e-13);
            let step = 1e-5;
            let plus = expm_i_hermitian(&(&h + &e.scale_real(step)));
            let minus = expm_i_hermitian(&(&h - &e.scale_real(step)));
            let fd = (&plus - &minus).scale_real(0.5 / step);
            assert!(fd.max_abs_diff(&d[0]) < 1e-8);
        }
    }

    #[test]
    fn exponential_derivative_at_degenerate_point() {
        // at H = 0 the derivative along E is iE
        let e = ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let (u, d) = expm_i_hermitian_with_derivatives(&ComplexMatrix::zeros(2, 2), std::slice::from_ref(&e));
        assert!(u.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(d[0].max_abs_diff(&e.scale(C64::i())) < 1e-15);
    }

    #[test]
    fn lu_solves_and_determinant() {
        let a = [4.0, 3.0, 6.0, 3.0];
        let lu = RealLu::new(2, &a).unwrap();
        assert!((lu.det() + 6.0).abs() < 1e-14);
        let x = lu.solve(&[10.0, 12.0]);
        assert!((4.0 * x[0] + 3.0 * x[1] - 10.0).abs() < 1e-13);
        assert!((6.0 * x[0] + 3.0 * x[1] - 12.0).abs() < 1e-13);
        assert!(RealLu::new(2, &[1.0, 2.0, 2.0, 4.0]).is_none());
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
