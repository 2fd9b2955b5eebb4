//! Dense vectors and square matrices of modest order, Gaussian elimination
//! with partial pivoting, and the matrix exponential.
//!
//! Arithmetic operators panic on dimension mismatch, as slices do on
//! out-of-range indexing. The solver entry points validate their inputs and
//! return [`Error`] instead.

use std::ops::{Add, Deref, DerefMut, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot threshold used by [`gauss_solve`].
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// Column vector of length n.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn from_vec(data: Vec<T>) -> Self {
        Self(data)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn from_elem(n: usize, value: T) -> Self {
        Self(vec![value; n])
    }

    pub fn ones(n: usize) -> Self {
        Self::from_elem(n, T::one())
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Max-magnitude norm.
    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn sum(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self(self.0.iter().map(|&x| x * factor).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `‖self − other‖∞`.
    pub fn distance_inf(&self, other: &Self) -> T {
        (self - other).norm_inf()
    }
}

impl<T> Deref for Vector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Vector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T: Scalar> From<Vec<T>> for Vector<T> {
    fn from(data: Vec<T>) -> Self {
        Self(data)
    }
}

impl<T: Scalar> FromIterator<T> for Vector<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<T: Scalar> Add for &Vector<T> {
    type Output = Vector<T>;

    fn add(self, rhs: &Vector<T>) -> Vector<T> {
        assert_eq!(self.len(), rhs.len(), "vector add: length mismatch");
        self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect()
    }
}

impl<T: Scalar> Sub for &Vector<T> {
    type Output = Vector<T>;

    fn sub(self, rhs: &Vector<T>) -> Vector<T> {
        assert_eq!(self.len(), rhs.len(), "vector sub: length mismatch");
        self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect()
    }
}

impl<T: Scalar> Neg for &Vector<T> {
    type Output = Vector<T>;

    fn neg(self) -> Vector<T> {
        self.0.iter().map(|&a| -a).collect()
    }
}

/// Square n×n matrix stored row-major; entry `(i, j)` is row i, column j.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    order: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            order: n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major nested rows; every row must have
    /// length equal to the number of rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { order: n, data })
    }

    /// Builds a matrix from a flat row-major buffer of length n².
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { order: n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { order: n, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_row_major(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn column(&self, j: usize) -> Vector<T> {
        (0..self.order).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.order).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vector<T> {
        (0..self.order).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    /// `diag(d) · self`: row i scaled by `d[i]`.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.order, "scale_rows: length mismatch");
        Self::from_fn(self.order, |i, j| d[i] * self[(i, j)])
    }

    /// Induced ∞-norm (max absolute row sum).
    pub fn norm_inf(&self) -> T {
        (0..self.order)
            .map(|i| self.row(i).iter().fold(T::zero(), |acc, x| acc + x.abs()))
            .fold(T::zero(), T::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_identity(&self) -> bool {
        (0..self.order).all(|i| {
            (0..self.order).all(|j| {
                let expected = if i == j { T::one() } else { T::zero() };
                self[(i, j)] == expected
            })
        })
    }

    pub fn mul_vec(&self, x: &[T]) -> Vector<T> {
        let mut out = vec![T::zero(); self.order];
        self.mul_vec_into(x, &mut out);
        Vector(out)
    }

    /// Writes `self · x` into `out` without allocating.
    pub fn mul_vec_into(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.order, "mul_vec: length mismatch");
        assert_eq!(out.len(), self.order, "mul_vec: output length mismatch");
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .row(i)
                .iter()
                .zip(x)
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.order, rhs.order, "matmul: order mismatch");
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.order && j < self.order, "matrix index out of range");
        &self.data[i * self.order + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.order && j < self.order, "matrix index out of range");
        &mut self.data[i * self.order + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.order, rhs.order, "matrix add: order mismatch");
        Matrix {
            order: self.order,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.order, rhs.order, "matrix sub: order mismatch");
        Matrix {
            order: self.order,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Scalar> Mul<&Vector<T>> for &Matrix<T> {
    type Output = Vector<T>;

    fn mul(self, rhs: &Vector<T>) -> Vector<T> {
        self.mul_vec(rhs)
    }
}

/// Solves `m · x = b` by Gaussian elimination with partial (column-max)
/// pivoting, using the default relative pivot threshold.
pub fn gauss_solve<T: Scalar>(m: &Matrix<T>, b: &[T]) -> Result<Vector<T>> {
    gauss_solve_with_tol(m, b, T::lit(DEFAULT_PIVOT_TOL))
}

/// As [`gauss_solve`], with the pivot threshold given relative to the
/// largest entry magnitude of `m`. A column whose best pivot candidate does
/// not exceed `rel_tol · max|m_ij|` makes the system singular.
pub fn gauss_solve_with_tol<T: Scalar>(m: &Matrix<T>, b: &[T], rel_tol: T) -> Result<Vector<T>> {
    let n = m.order();
    if n == 0 {
        return Err(Error::Empty);
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    if !b.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }

    let pivot_tol = rel_tol * m.max_abs();
    let mut a = m.data.clone();
    let mut x = b.to_vec();

    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, T::zero()), |acc, cand| if cand.1 > acc.1 { cand } else { acc });
        if best <= pivot_tol {
            return Err(Error::SingularMatrix { column: k });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            if factor == T::zero() {
                continue;
            }
            a[i * n + k] = T::zero();
            for j in k + 1..n {
                a[i * n + j] = a[i * n + j] - factor * a[k * n + j];
            }
            x[i] = x[i] - factor * x[k];
        }
    }

    for k in (0..n).rev() {
        let tail = (k + 1..n).fold(T::zero(), |acc, j| acc + a[k * n + j] * x[j]);
        x[k] = (x[k] - tail) / a[k * n + k];
    }

    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("solution"));
    }
    Ok(Vector(x))
}

/// `e^{tM}` by scaling and squaring around a truncated Taylor series.
///
/// The scaled argument has ∞-norm at most 1/2, where the series converges
/// to working precision in under twenty terms.
pub fn mat_exp<T: Scalar>(m: &Matrix<T>, t: T) -> Result<Matrix<T>> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    let n = m.order();
    let arg = m.scale(t);
    let norm = arg.norm_inf();
    let half = T::lit(0.5);

    let mut squarings = 0u32;
    let mut scale = T::one();
    while norm * scale > half {
        scale = scale * half;
        squarings += 1;
    }
    let scaled = arg.scale(scale);

    let mut result = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=60 {
        term = term.matmul(&scaled).scale(T::one() / T::from_count(k));
        result = &result + &term;
        if term.max_abs() <= T::epsilon() * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.is_finite() {
        return Err(Error::NonFinite("matrix exponential"));
    }
    Ok(result)
}

/// Exact solution at time `t` of `dx/dt = M x + g`, `x(0) = p0`, for
/// constant `g` and invertible `M`:
/// `e^{tM} p0 + M⁻¹ (e^{tM} − I) g`.
pub fn affine_steady_solution<T: Scalar>(
    m: &Matrix<T>,
    g: &[T],
    p0: &[T],
    t: T,
) -> Result<Vector<T>> {
    let n = m.order();
    for len in [g.len(), p0.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let expm = mat_exp(m, t)?;
    let homogeneous = expm.mul_vec(p0);
    let shifted = &expm - &Matrix::identity(n);
    let particular = gauss_solve(m, &shifted.mul_vec(g))?;
    Ok(&homogeneous + &particular)
}

/// Asymptotic growth rate `lim ln‖e^{tK}‖ / t` of `dx/dt = K x`, which equals
/// the spectral abscissa (largest real part of an eigenvalue of `K`).
///
/// Estimated by repeated squaring of `e^{τK}` with running renormalisation;
/// the estimate carries an O(ln(t)/t) bias for defective or strongly
/// non-normal `K`.
pub fn growth_rate_estimate<T: Scalar>(k: &Matrix<T>) -> Result<T> {
    let scale = k.norm_inf();
    if scale == T::zero() {
        return Ok(T::zero());
    }
    let tau = T::one() / scale;
    let mut power = mat_exp(k, tau)?;
    let mut log_norm = T::zero();
    let mut horizon = tau;
    let mut estimate = power.norm_inf().ln() / horizon;
    for _ in 0..60 {
        let norm = power.norm_inf();
        if norm == T::zero() {
            return Ok(T::neg_infinity());
        }
        log_norm = log_norm + norm.ln();
        power = power.scale(T::one() / norm);
        power = power.matmul(&power);
        log_norm = log_norm + log_norm;
        horizon = horizon + horizon;
        let next = (log_norm + power.norm_inf().ln()) / horizon;
        let converged = (next - estimate).abs() <= T::lit(1e-9) * (T::one() + next.abs());
        estimate = next;
        if converged {
            break;
        }
    }
    Ok(estimate)
}
