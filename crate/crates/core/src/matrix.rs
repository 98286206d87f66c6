//! Dense complex matrices.
//!
//! [`ComplexMatrix`] is the carrier for every operator, density matrix and
//! unitary in the crate. Storage is row-major. Products go through the
//! complex GEMM kernel of `matrixmultiply`; spectral routines convert to
//! `nalgebra` and back.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// JSON form `{"rows": N, "cols": M, "data": [[re, im], ...]}`, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Thin singular value decomposition `a = u * diag(s) * v_adj`, singular
/// values in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v_adj: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        Self::new(m.rows, m.cols, m.data.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: m.data.into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(pos / cols.max(1), pos % cols.max(1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Matrix unit `e_ij` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[i * n + j] = ONE;
        m
    }

    /// Column vector as an `n x 1` matrix.
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Rank-one operator `a b*`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    /// Assemble a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (r, &z) in col.iter().enumerate() {
                m.data[r * cols + c] = z;
            }
        }
        m
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare(self.rows, self.cols))
        }
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
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
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    /// Trace inner product `Tr(self* other)`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix product via complex GEMM.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        if m == 0 || n == 0 || k == 0 {
            return out;
        }
        // SAFETY: Complex64 is #[repr(C)] { re, im }, layout-identical to
        // [f64; 2]; the strides describe the row-major buffers exactly.
        unsafe {
            matrixmultiply::zgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                self.data.as_ptr() as *const [f64; 2],
                k as isize,
                1,
                other.data.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                out.data.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
        out
    }

    /// `self* other` without materialising the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        self.adjoint().matmul(other)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Conjugation `u self u*`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Self::zeros(r1 * r2, c1 * c2);
        let oc = c1 * c2;
        for i in 0..r1 {
            for j in 0..c1 {
                let a = self.data[i * c1 + j];
                if a == ZERO {
                    continue;
                }
                for p in 0..r2 {
                    let dst = (i * r2 + p) * oc + j * c2;
                    let src = &other.data[p * c2..(p + 1) * c2];
                    for (o, &b) in out.data[dst..dst + c2].iter_mut().zip(src) {
                        *o = a * b;
                    }
                }
            }
        }
        out
    }

    /// Partial trace over the second factor of `C^d1 ⊗ C^d2`.
    pub fn partial_trace_second(&self, d1: usize, d2: usize) -> Result<Self> {
        self.check_bipartite(d1, d2)?;
        let n = d1 * d2;
        Ok(Self::from_fn(d1, d1, |i, j| {
            (0..d2).map(|p| self.data[(i * d2 + p) * n + j * d2 + p]).sum()
        }))
    }

    /// Partial trace over the first factor of `C^d1 ⊗ C^d2`.
    pub fn partial_trace_first(&self, d1: usize, d2: usize) -> Result<Self> {
        self.check_bipartite(d1, d2)?;
        let n = d1 * d2;
        Ok(Self::from_fn(d2, d2, |p, q| {
            (0..d1).map(|i| self.data[(i * d2 + p) * n + i * d2 + q]).sum()
        }))
    }

    fn check_bipartite(&self, d1: usize, d2: usize) -> Result<()> {
        if self.rows != d1 * d2 || self.cols != d1 * d2 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not on a {}x{} bipartite space",
                self.rows, self.cols, d1, d2
            )));
        }
        Ok(())
    }

    /// `‖self - self*‖_max`
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        (&self.adjoint() + self).scale_real(0.5)
    }

    /// `‖self* self - 1‖_max`
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let a = (&self.adjoint_matmul(self) - &Self::identity(n)).max_abs();
        let b = (&self.matmul(&self.adjoint()) - &Self::identity(n)).max_abs();
        a.max(b)
    }

    /// `‖self* self - 1‖_max` for an isometry (no square requirement).
    pub fn isometry_residual(&self) -> f64 {
        (&self.adjoint_matmul(self) - &Self::identity(self.cols)).max_abs()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Spectral decomposition of a Hermitian matrix (the Hermitian part is
    /// used, so tiny asymmetries from roundoff are harmless).
    pub fn eigh(&self) -> HermitianEigen {
        assert!(self.is_square(), "eigh needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return HermitianEigen {
                values: vec![],
                vectors: Self::zeros(0, 0),
            };
        }
        let eig = nalgebra::SymmetricEigen::new(self.hermitian_part().to_nalgebra());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = Self::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn eigvalsh(&self) -> Vec<f64> {
        self.eigh().values
    }

    pub fn svd(&self) -> Svd {
        let svd = nalgebra::SVD::new(self.to_nalgebra(), true, true);
        let k = svd.singular_values.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let u_na = svd.u.expect("svd u");
        let v_na = svd.v_t.expect("svd v_t");
        let u = Self::from_fn(self.rows, k, |r, c| u_na[(r, order[c])]);
        let v_adj = Self::from_fn(k, self.cols, |r, c| v_na[(order[r], c)]);
        let s = order.iter().map(|&i| svd.singular_values[i]).collect();
        Svd { u, s, v_adj }
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = nalgebra::SVD::new(self.to_nalgebra(), false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        if self.is_square() && self.hermitian_residual() <= 1e-14 * (1.0 + self.max_abs()) {
            return self.eigvalsh().iter().map(|x| x.abs()).sum();
        }
        self.singular_values().iter().sum()
    }

    /// Apply a real function to the spectrum of a Hermitian matrix.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> f64) -> Self {
        let HermitianEigen { values, vectors } = self.eigh();
        let scaled = Self::from_fn(vectors.rows, vectors.cols, |r, c| {
            vectors.data[r * vectors.cols + c] * f(values[c])
        });
        scaled.matmul(&vectors.adjoint())
    }

    /// Square root of a positive semidefinite matrix (negative roundoff
    /// eigenvalues clipped to zero).
    pub fn sqrt_psd(&self) -> Self {
        self.hermitian_function(|x| x.max(0.0).sqrt())
    }

    /// `exp(i s H)` for Hermitian `H`.
    pub fn exp_i_hermitian(&self, s: f64) -> Self {
        let HermitianEigen { values, vectors } = self.eigh();
        let scaled = Self::from_fn(vectors.rows, vectors.cols, |r, c| {
            vectors.data[r * vectors.cols + c] * C64::from_polar(1.0, s * values[c])
        });
        scaled.matmul(&vectors.adjoint())
    }

    /// Polar unitary factor `u` of `a = u |a|` for square `a`.
    pub fn polar_unitary(&self) -> Self {
        let Svd { u, v_adj, .. } = self.svd();
        u.matmul(&v_adj)
    }

    /// Principal Hermitian logarithm `H` of a unitary `u = exp(iH)`, with the
    /// spectrum of `H` in `(-π, π]`.
    pub fn unitary_log(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Self::zeros(0, 0);
        }
        let schur = nalgebra::Schur::new(self.to_nalgebra());
        let (q, t) = schur.unpack();
        let q = Self::from_nalgebra(&q);
        let phases: Vec<C64> = (0..n)
            .map(|i| {
                let mut a = t[(i, i)].arg();
                if a <= -std::f64::consts::PI {
                    a += 2.0 * std::f64::consts::PI;
                }
                C64::new(a, 0.0)
            })
            .collect();
        let h = Self::from_diagonal(&phases).conjugate_by(&q);
        h.hermitian_part()
    }

    /// Rank at relative singular-value cut `rel_tol`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let s = self.singular_values();
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        s.iter().filter(|&&x| x >= rel_tol * top).count()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
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
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(12) {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; see [`ComplexMatrix::kron`].
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Contract the second tensor factor of an operator on `C^d ⊗ C^m` against
/// the unit vector `omega`: the result `b` satisfies
/// `<ξ, b η> = <ξ⊗Ω, T (η⊗Ω)>`.
pub fn contract_second_factor(t: &ComplexMatrix, omega: &[C64]) -> Result<ComplexMatrix> {
    let n = t.require_square()?;
    let m = omega.len();
    if m == 0 || n % m != 0 {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {n} cannot be split with a second factor of size {m}"
        )));
    }
    let norm = vec_norm(omega);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(norm));
    }
    let d = n / m;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let mut acc = ZERO;
        for p in 0..m {
            let row = (i * m + p) * n + j * m;
            let left = omega[p].conj();
            if left == ZERO {
                continue;
            }
            let s: C64 = (0..m).map(|q| t.data[row + q] * omega[q]).sum();
            acc += left * s;
        }
        acc
    }))
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

pub fn basis_vector(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: [[f64; 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&a[0], &a[1]])
    }

    fn seeded(n: usize, seed: u64) -> ComplexMatrix {
        let mut s = seed;
        ComplexMatrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            C64::new(a, b)
        })
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = tensor_product(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn diagonal_tensor() {
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let zz = tensor_product(&z, &z);
        assert_eq!(zz, ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn matmul_matches_naive_product() {
        for (r, k, c) in [(3, 5, 2), (7, 7, 7), (1, 4, 9)] {
            let a = seeded(r.max(k), 3).clone();
            let a = ComplexMatrix::from_fn(r, k, |i, j| a[(i, j)]);
            let b = seeded(k.max(c), 9);
            let b = ComplexMatrix::from_fn(k, c, |i, j| b[(i, j)]);
            let fast = a.matmul(&b);
            let naive = ComplexMatrix::from_fn(r, c, |i, j| (0..k).map(|p| a[(i, p)] * b[(p, j)]).sum());
            assert!((&fast - &naive).max_abs() < 1e-14);
        }
    }

    #[test]
    fn mixed_product_identity() {
        let (a, b, c, d) = (seeded(2, 1), seeded(2, 2), seeded(2, 3), seeded(2, 4));
        let lhs = tensor_product(&a, &b).matmul(&tensor_product(&c, &d));
        let rhs = tensor_product(&a.matmul(&c), &b.matmul(&d));
        assert!((&lhs - &rhs).max_abs() <= 1e-12);
    }

    #[test]
    fn contract_product_operator() {
        let x = seeded(2, 5);
        let y = seeded(3, 6);
        let omega = {
            let v = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO];
            v
        };
        let b = contract_second_factor(&x.kron(&y), &omega).unwrap();
        let expect = x.scale(vec_inner(&omega, &y.mul_vec(&omega)));
        assert!((&b - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn contract_identity_is_identity() {
        let omega = vec![C64::new(0.0, 1.0), ZERO];
        let b = contract_second_factor(&ComplexMatrix::identity(6), &omega).unwrap();
        assert!((&b - &ComplexMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn contract_first_basis_vector_picks_interleaved_block() {
        // Oracle: with Ω = e_0 on C^2, <e_i⊗e_0, T e_j⊗e_0> = T[2i, 2j].
        let t = seeded(4, 11);
        let b = contract_second_factor(&t, &basis_vector(2, 0)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(b[(i, j)], t[(2 * i, 2 * j)]);
            }
        }
    }

    #[test]
    fn contract_rejects_bad_inputs() {
        let t = ComplexMatrix::identity(4);
        assert!(matches!(
            contract_second_factor(&t, &[ONE, ONE, ONE]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(contract_second_factor(&t, &[ONE, ONE]), Err(Error::NotUnit(_))));
    }

    #[test]
    fn partial_traces_of_product() {
        let a = m2([[0.25, 0.0], [0.0, 0.75]]);
        let b = m2([[0.5, 0.5], [0.5, 0.5]]);
        let ab = a.kron(&b);
        assert!((&ab.partial_trace_second(2, 2).unwrap() - &a).max_abs() < 1e-15);
        assert!((&ab.partial_trace_first(2, 2).unwrap() - &b).max_abs() < 1e-15);
    }

    #[test]
    fn unitary_log_round_trip() {
        let h = seeded(4, 21).hermitian_part();
        let u = h.exp_i_hermitian(1.0);
        assert!(u.unitarity_residual() < 1e-13);
        let log = u.unitary_log();
        assert!(log.hermitian_residual() < 1e-13);
        let back = log.exp_i_hermitian(1.0);
        assert!((&back - &u).max_abs() < 1e-12);
        for ev in log.eigvalsh() {
            assert!(ev > -std::f64::consts::PI && ev <= std::f64::consts::PI + 1e-12);
        }
    }

    #[test]
    fn new_rejects_non_finite_and_bad_shape() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ONE; 3]),
            Err(Error::BadShape { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![ONE, C64::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite(0, 1))
        ));
    }
}
