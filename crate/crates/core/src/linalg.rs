//! Dense linear-algebra kernels: matrix exponential (scaling and squaring
//! with diagonal Padé approximants), the exponential's running integral via
//! an augmented matrix, LU solves with condition estimates, and a cyclic
//! Jacobi eigensolver for symmetric matrices.
//!
//! Nothing here knows about games or networks.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major storage.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    /// Copies the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn add(self, rhs: Self) -> DenseMatrix<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn sub(self, rhs: Self) -> DenseMatrix<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn mul(self, rhs: Self) -> DenseMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Neg for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn neg(self) -> DenseMatrix<T> {
        self.scale(-T::one())
    }
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|v| format!("{v:?}")).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Tolerances for the linear-algebra engine.
#[derive(Debug, Clone, Copy)]
pub struct LinalgConfig {
    /// Reciprocal 1-norm condition number below which a matrix is treated as singular.
    pub rcond_threshold: f64,
}

impl Default for LinalgConfig {
    fn default() -> Self {
        Self { rcond_threshold: 1e-12 }
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

// Backward-error bounds θ_m for the [m/m] Padé approximant (1-norm).
#[allow(clippy::excessive_precision)]
const THETA_F64: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];
#[allow(clippy::excessive_precision)]
const THETA_F32: [(usize, f64); 3] = [
    (3, 4.258730016922831e-1),
    (5, 1.880152677804762e0),
    (7, 3.925724783138660e0),
];

/// Coefficients of the numerator of the [m/m] Padé approximant of e^x,
/// normalised so that the constant term is 1.
fn pade_coefficients(m: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(m + 1);
    c.push(1.0);
    for j in 0..m {
        let prev = c[j];
        c.push(prev * (m - j) as f64 / ((j + 1) as f64 * (2 * m - j) as f64));
    }
    c
}

fn theta_table<T: Real>() -> &'static [(usize, f64)] {
    if T::epsilon() > lit(1e-10) {
        &THETA_F32
    } else {
        &THETA_F64
    }
}

/// Horner evaluation of `Σ_i coeffs[i] B^i`.
fn matrix_polynomial<T: Real>(b: &DenseMatrix<T>, coeffs: &[f64]) -> DenseMatrix<T> {
    let n = b.rows();
    let mut acc = DenseMatrix::identity(n).scale(lit(*coeffs.last().expect("non-empty")));
    for &c in coeffs.iter().rev().skip(1) {
        acc = &(&acc * b) + &DenseMatrix::identity(n).scale(lit(c));
    }
    acc
}

fn pade_approximant<T: Real>(a: &DenseMatrix<T>, m: usize) -> Result<DenseMatrix<T>> {
    let c = pade_coefficients(m);
    let even: Vec<f64> = c.iter().step_by(2).copied().collect();
    let odd: Vec<f64> = c.iter().skip(1).step_by(2).copied().collect();
    let a2 = a * a;
    let v = matrix_polynomial(&a2, &even);
    let u = a * &matrix_polynomial(&a2, &odd);
    let p = &v + &u;
    let q = &v - &u;
    // q is well conditioned for ‖a‖₁ ≤ θ_m, so no rcond gate here.
    Ok(Lu::factor(&q)?.solve(&p))
}

/// `e^{M t}` by scaling and squaring.
pub fn matrix_exponential<T: Real>(m: &DenseMatrix<T>, t: T) -> Result<DenseMatrix<T>> {
    m.require_square()?;
    if !m.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let a = m.scale(t);
    expm(&a)
}

/// `e^{A}` for a square finite matrix.
pub fn expm<T: Real>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    a.require_square()?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let norm = a.norm_one();
    if norm == T::zero() {
        return Ok(DenseMatrix::identity(n));
    }
    let table = theta_table::<T>();
    for &(m, theta) in &table[..table.len() - 1] {
        if norm <= lit(theta) {
            return pade_approximant(a, m);
        }
    }
    let (m_max, theta_max) = table[table.len() - 1];
    let ratio = norm / lit(theta_max);
    let s = if ratio <= T::one() {
        0
    } else {
        ratio.log2().ceil().to_i32().expect("finite norm")
    };
    let scaled = a.scale(lit::<T>(2.0).powi(-s));
    let mut r = pade_approximant(&scaled, m_max)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Returns `(Φ, Ψ) = (e^{Mt}, ∫_0^t e^{M(t−τ)} dτ)` from one exponential of
/// the augmented matrix `[[M, I], [0, 0]]`.
pub fn exp_with_integral<T: Real>(
    m: &DenseMatrix<T>,
    t: T,
) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    m.require_square()?;
    if !m.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if t < T::zero() {
        return Err(Error::InvalidArgument(format!("integral horizon must be >= 0, got {t}")));
    }
    let n = m.rows();
    let mut aug = DenseMatrix::zeros(2 * n, 2 * n);
    aug.set_block(0, 0, m);
    aug.set_block(0, n, &DenseMatrix::identity(n));
    let e = matrix_exponential(&aug, t)?;
    Ok((e.block(0, 0, n, n), e.block(0, n, n, n)))
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

/// LU factorisation `P M = L U` with partial pivoting.
#[derive(Clone)]
pub struct Lu<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
    norm_one: T,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn factor(m: &DenseMatrix<T>) -> Result<Self> {
        m.require_square()?;
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = m.rows();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == T::zero() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - f * v;
                    }
                }
            }
        }
        Ok(Self { lu, perm, norm_one: m.norm_one(), singular })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(b.rows(), self.dim(), "right-hand side row count");
        let mut out = DenseMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn inverse(&self) -> DenseMatrix<T> {
        self.solve(&DenseMatrix::identity(self.dim()))
    }

    /// Reciprocal 1-norm condition number, `1 / (‖M‖₁ ‖M⁻¹‖₁)`.
    pub fn rcond(&self) -> T {
        if self.singular || self.norm_one == T::zero() {
            return T::zero();
        }
        let inv_norm = self.inverse().norm_one();
        if !inv_norm.is_finite() {
            return T::zero();
        }
        T::one() / (self.norm_one * inv_norm)
    }

    /// Errors when the reciprocal condition number is below `threshold`.
    pub fn check_conditioning(&self, threshold: f64) -> Result<()> {
        let rcond = self.rcond();
        if rcond.is_nan() || rcond < lit(threshold) {
            let r = rcond.to_f64().unwrap_or(0.0);
            return Err(Error::Singular { rcond: r, cond: if r > 0.0 { 1.0 / r } else { f64::INFINITY } });
        }
        Ok(())
    }
}

/// Solves `M X = B` with partial pivoting, rejecting ill-conditioned `M`.
pub fn solve_linear<T: Real>(m: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    solve_linear_with(m, b, &LinalgConfig::default())
}

pub fn solve_linear_with<T: Real>(
    m: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    config: &LinalgConfig,
) -> Result<DenseMatrix<T>> {
    if b.rows() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "system is {}x{} but right-hand side has {} rows",
            m.rows(),
            m.cols(),
            b.rows()
        )));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite);
    }
    let lu = Lu::factor(m)?;
    lu.check_conditioning(config.rcond_threshold)?;
    Ok(lu.solve(b))
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem
// ---------------------------------------------------------------------------

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and an orthogonal matrix whose columns are eigenvectors.
pub fn symmetric_eigen<T: Real>(m: &DenseMatrix<T>) -> Result<(Vec<T>, DenseMatrix<T>)> {
    m.require_square()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    let scale = m.max_abs();
    if m.max_abs_diff(&m.transpose()) > lit::<T>(1e-12) * scale.max(T::one()) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);
    let tol = T::epsilon() * scale.max(T::min_positive_value());
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<T>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (lit::<T>(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Ok((a.diagonal(), v))
}
