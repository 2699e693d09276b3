//! Dense symmetric matrices and the spectral kernel everything else is built on.
//!
//! Matrices here are tiny (the Hessians of functions on ℝⁿ with n ≤ 16), so the
//! eigensolver is cyclic Jacobi: unconditionally convergent on symmetric input and
//! exact under negation, which keeps duality identities free of rounding drift.

mod poly;
mod structure;

pub use poly::{char_poly_shifted, sturm_largest_root, Poly, SturmChain};
pub use structure::{
    hermitian_part, k_eigenvalues, skew_hermitian_part, ComplexStructure, Field,
};

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension supported by the set catalog.
pub const MAX_DIM: usize = 16;

const JACOBI_MAX_SWEEPS: usize = 64;

/// A real symmetric `n × n` matrix stored as its packed upper triangle.
///
/// Because only one triangle exists, `get(i, j) == get(j, i)` holds bit for bit.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, s);
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from full rows, rejecting input that is not symmetric to 1e-12 relative.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("matrix must have at least one row".into()));
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        let scale = rows
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| 0.5 * (rows[i][j] + rows[j][i])))
    }

    /// Symmetrizes a general square matrix: `(M + Mᵀ) / 2`.
    pub fn symmetrize(m: &Mat) -> Self {
        assert_eq!(m.rows, m.cols, "symmetrize needs a square matrix");
        Self::from_fn(m.rows, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    /// Outer product `v vᵀ`, written `v ∘ v` elsewhere.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    /// Orthogonal projection `Σ ξᵢ ξᵢᵀ` onto the span of an orthonormal family.
    pub fn projection(basis: &[Vec<f64>], n: usize) -> Result<Self> {
        check_orthonormal(basis, n)?;
        let mut p = Self::zeros(n);
        for v in basis {
            for i in 0..n {
                for j in i..n {
                    let idx = packed_index(n, i, j);
                    p.data[idx] += v[i] * v[j];
                }
            }
        }
        Ok(p)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = packed_index(self.n, i, j);
        self.data[idx] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Frobenius inner product `⟨A, B⟩ = tr(AB)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.get(i, i) * other.get(i, i);
            for j in (i + 1)..self.n {
                s += 2.0 * self.get(i, j) * other.get(i, j);
            }
        }
        s
    }

    pub fn add_scaled_identity(&self, t: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            let idx = packed_index(self.n, i, i);
            m.data[idx] += t;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quad(&self, v: &[f64]) -> f64 {
        self.mat_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `gᵀ A g` for a general (possibly rectangular) `g` with `self.dim()` rows.
    pub fn congruence(&self, g: &Mat) -> Self {
        assert_eq!(g.rows, self.n);
        let ag = self.to_mat().matmul(g);
        let m = g.transpose().matmul(&ag);
        Self::symmetrize(&m)
    }

    /// Restriction `A|_W` to the span of an orthonormal family, in that basis.
    pub fn restrict(&self, basis: &[Vec<f64>]) -> Result<Self> {
        check_orthonormal(basis, self.n)?;
        let k = basis.len();
        let av: Vec<Vec<f64>> = basis.iter().map(|v| self.mat_vec(v)).collect();
        Ok(Self::from_fn(k, |i, j| {
            basis[i].iter().zip(&av[j]).map(|(a, b)| a * b).sum()
        }))
    }

    /// Principal submatrix on the given coordinate indices.
    pub fn principal(&self, coords: &[usize]) -> Self {
        Self::from_fn(coords.len(), |i, j| self.get(coords[i], coords[j]))
    }

    /// Ascending eigenvalues.
    pub fn eig_sorted(&self) -> Result<Vec<f64>> {
        Ok(self.eigh()?.values)
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.eig_sorted()?[0])
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(*self.eig_sorted()?.last().expect("nonempty spectrum"))
    }

    /// Full eigendecomposition by cyclic Jacobi rotations.
    pub fn eigh(&self) -> Result<Eigen> {
        let n = self.n;
        let mut a = self.to_mat();
        let mut v = Mat::identity(n);
        let frob = self.frobenius();
        if n == 1 || frob == 0.0 {
            return Ok(Eigen::from_unsorted(
                (0..n).map(|i| a[(i, i)]).collect(),
                v,
            ));
        }
        let target = f64::EPSILON * frob;
        let mut off = off_diagonal_norm(&a);
        let mut sweeps = 0;
        while off > target {
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    sweeps,
                    off_norm: off,
                });
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = if theta.is_finite() {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    } else {
                        0.0
                    };
                    if t == 0.0 {
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        continue;
                    }
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    rotate(&mut a, &mut v, p, q, c, s, t);
                }
            }
            sweeps += 1;
            off = off_diagonal_norm(&a);
        }
        Ok(Eigen::from_unsorted((0..n).map(|i| a[(i, i)]).collect(), v))
    }

    pub fn frobenius(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// True when `A ⪰ -tol·I`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.lambda_min()? >= -tol)
    }

    pub fn as_packed(&self) -> &[f64] {
        &self.data
    }
}

fn off_diagonal_norm(a: &Mat) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows {
        for j in (i + 1)..a.cols {
            s += 2.0 * a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

fn rotate(a: &mut Mat, v: &mut Mat, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows;
    let apq = a[(p, q)];
    let tau = s / (1.0 + c);
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[(r, p)];
            let arq = a[(r, q)];
            let np = arp - s * (arq + tau * arp);
            let nq = arq + s * (arp - tau * arq);
            a[(r, p)] = np;
            a[(p, r)] = np;
            a[(r, q)] = nq;
            a[(q, r)] = nq;
        }
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp - s * (vrq + tau * vrp);
        v[(r, q)] = vrq + s * (vrp - tau * vrq);
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymMatrix")
            .field("n", &self.n)
            .field("rows", &self.to_rows())
            .finish()
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix sum");
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix difference");
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&SymMatrix> for SymMatrix {
    fn add_assign(&mut self, rhs: &SymMatrix) {
        assert_eq!(self.n, rhs.n);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, s: f64) -> SymMatrix {
        self.scaled(s)
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl Eigen {
    fn from_unsorted(values: Vec<f64>, vectors: Mat) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let sorted = order.iter().map(|&i| values[i]).collect();
        let vecs = Mat::from_fn(n, n, |r, c| vectors[(r, order[c])]);
        Self {
            values: sorted,
            vectors: vecs,
        }
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.values.len();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)])
                .sum()
        })
    }
}

/// Small general dense matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
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

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParameter("ragged matrix rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>], rows: usize) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let scale = self.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::SingularMatrix);
        }
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .expect("nonempty pivot range");
            if a[(pivot, col)].abs() <= 1e-12 * scale {
                return Err(Error::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[(i, j)] -= f * a[(col, j)];
                    inv[(i, j)] -= f * inv[(col, j)];
                }
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Largest deviation of the Gram matrix of `basis` from the identity.
pub fn gram_deviation(basis: &[Vec<f64>]) -> f64 {
    let mut dev = 0.0f64;
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate().skip(i) {
            let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((d - target).abs());
        }
    }
    dev
}

fn check_orthonormal(basis: &[Vec<f64>], n: usize) -> Result<()> {
    for v in basis {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let deviation = gram_deviation(basis);
    if deviation > 1e-8 {
        return Err(Error::NotOrthonormal { deviation });
    }
    Ok(())
}

/// `tr_ξ A = Σᵢ ξᵢᵀ A ξᵢ` for an orthonormal family `ξ`.
pub fn trace_on(a: &SymMatrix, xi: &[Vec<f64>]) -> Result<f64> {
    check_orthonormal(xi, a.dim())?;
    Ok(xi.iter().map(|v| a.quad(v)).sum())
}

/// Orthonormal completion: returns a basis of the orthogonal complement of `basis` in ℝⁿ.
pub fn orthogonal_complement(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::new();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        // two passes of Gram–Schmidt for stability
        for _ in 0..2 {
            for b in &frame {
                let d: f64 = b.iter().zip(&e).map(|(x, y)| x * y).sum();
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei -= d * bi;
                }
            }
        }
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            e.iter_mut().for_each(|x| *x /= norm);
            frame.push(e.clone());
            out.push(e);
        }
        if frame.len() == n {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_of_permuted_diagonal() {
        let a = SymMatrix::diag(&[3.0, 1.0, 2.0]);
        assert_eq!(a.eig_sorted().unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eig_of_reflection() {
        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = a.eig_sorted().unwrap();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = SymMatrix::from_fn(5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.7);
        let e = a.eigh().unwrap();
        let r = e.reconstruct();
        let err = (&r - &a).max_abs();
        assert!(err <= 1e-10 * (1.0 + a.max_abs()), "err {err}");
    }

    #[test]
    fn packed_storage_is_symmetric() {
        let mut a = SymMatrix::zeros(3);
        a.set(2, 0, 4.5);
        assert_eq!(a.get(0, 2), 4.5);
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let r = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]);
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn trace_on_coordinate_plane() {
        let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let xi = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(trace_on(&a, &xi).unwrap(), 3.0);
        let full = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_eq!(trace_on(&a, &full).unwrap(), a.trace());
    }

    #[test]
    fn trace_on_rejects_non_orthonormal() {
        let a = SymMatrix::identity(2);
        let xi = vec![vec![1.0, 0.0], vec![1.0, 1e-3]];
        assert!(matches!(trace_on(&a, &xi), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn inverse_roundtrip_and_singular() {
        let g = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let gi = g.inverse().unwrap();
        assert!(g.matmul(&gi).max_abs_diff(&Mat::identity(2)) < 1e-14);
        let s = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(s.inverse(), Err(Error::SingularMatrix)));
    }

    #[test]
    fn complement_spans_rest() {
        let b = vec![vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0]];
        let c = orthogonal_complement(&b, 3);
        assert_eq!(c.len(), 2);
        let mut all = b.clone();
        all.extend(c);
        assert!(gram_deviation(&all) < 1e-12);
    }

    #[test]
    fn negation_is_exact() {
        let a = SymMatrix::from_fn(4, |i, j| (i as f64 + 1.3) * (j as f64 - 0.7) + (i * j) as f64);
        let e = a.eig_sorted().unwrap();
        let mut en = (-&a).eig_sorted().unwrap();
        en.reverse();
        for (x, y) in e.iter().zip(&en) {
            assert_eq!(*x, -*y);
        }
    }
}
