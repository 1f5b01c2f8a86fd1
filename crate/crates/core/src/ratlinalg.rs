//! Exact rational linear algebra.
//!
//! Every routine here is deterministic: row reduction always picks the
//! leftmost column with a nonzero entry and, within that column, the topmost
//! available row. Bases of kernels, images, complements and quotients are all
//! read off from that single reduction policy, so two runs on the same input
//! produce bit-identical output.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Integer as a rational.
pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// `num / den` in lowest terms. Panics if `den == 0`.
pub fn frac(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspace containment violated")]
    NotContained,
    #[error("basis columns are linearly dependent")]
    DependentBasis,
}

/// Dense matrix of exact rationals, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    /// Builds a matrix from rows. All rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: &[Vec<Rational>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r.iter().cloned());
        }
        RationalMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect();
        Self::from_rows(cols, &rows)
    }

    /// Builds a matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, x) in c.iter().enumerate() {
                m.data[i * columns.len() + j] = x.clone();
            }
        }
        m
    }

    /// A single column vector.
    pub fn column_vector(v: &[Rational]) -> Self {
        RationalMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn add_to(&mut self, i: usize, j: usize, value: &Rational) {
        let e = &mut self.data[i * self.cols + j];
        *e += value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        RationalMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Writes `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = block.get(i, j);
                if !v.is_zero() {
                    self.set(r0 + i, c0 + j, v.clone());
                }
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn rank(&self) -> usize {
        rref(self).rank
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        solve(self, &Self::identity(self.rows)).filter(|_| self.rank() == self.rows)
    }

    fn to_row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a RationalMatrix> for &'a RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &'a RationalMatrix) -> RationalMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = RationalMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a RationalMatrix> for &'a RationalMatrix {
    type Output = RationalMatrix;

    fn add(self, rhs: &'a RationalMatrix) -> RationalMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a RationalMatrix> for &'a RationalMatrix {
    type Output = RationalMatrix;

    fn sub(self, rhs: &'a RationalMatrix) -> RationalMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shape mismatch");
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &RationalMatrix {
    type Output = RationalMatrix;

    fn neg(self) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Gauss-Jordan elimination with the leftmost-pivot, topmost-row policy.
pub fn rref(m: &RationalMatrix) -> Rref {
    let (rows, cols) = m.shape();
    let mut a = m.to_row_vecs();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        if !inv.is_one() {
            for x in a[r][c..].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let support: Vec<usize> = (c..cols).filter(|&j| !a[r][j].is_zero()).collect();
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rank = pivots.len();
    Rref {
        matrix: RationalMatrix::from_rows(cols, &a),
        pivots,
        rank,
    }
}

/// A particular solution `X` of `A X = B` with all free variables set to zero,
/// or `None` when some column of `B` is outside the column space of `A`.
pub fn solve(a: &RationalMatrix, b: &RationalMatrix) -> Option<RationalMatrix> {
    assert_eq!(a.rows(), b.rows(), "solve: row mismatch");
    let n = a.cols();
    let red = rref(&a.hstack(b));
    if red.pivots.iter().any(|&p| p >= n) {
        return None;
    }
    let mut x = RationalMatrix::zeros(n, b.cols());
    for (row, &p) in red.pivots.iter().enumerate() {
        for k in 0..b.cols() {
            x.set(p, k, red.matrix.get(row, n + k).clone());
        }
    }
    Some(x)
}

/// Solves `A x = b` for a single right-hand side.
pub fn solve_vec(a: &RationalMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    solve(a, &RationalMatrix::column_vector(b)).map(|x| x.column(0))
}

/// Basis of `{v : m v = 0}`, one vector per free column of the RREF.
pub fn kernel_basis(m: &RationalMatrix) -> Subspace {
    let cols = m.cols();
    let red = rref(m);
    let mut is_pivot = vec![false; cols];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    let mut vectors = Vec::new();
    for f in (0..cols).filter(|&j| !is_pivot[j]) {
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (row, &p) in red.pivots.iter().enumerate() {
            v[p] = -red.matrix.get(row, f).clone();
        }
        vectors.push(v);
    }
    Subspace {
        ambient_dim: cols,
        basis: RationalMatrix::from_columns(cols, &vectors),
    }
}

/// Basis of the column space: the original columns at the pivot positions.
pub fn image_basis(m: &RationalMatrix) -> Subspace {
    let red = rref(m);
    Subspace {
        ambient_dim: m.rows(),
        basis: m.select_columns(&red.pivots),
    }
}

/// A linear subspace given by a matrix of independent basis columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: RationalMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: RationalMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: RationalMatrix::identity(ambient_dim),
        }
    }

    /// Wraps a matrix with independent columns.
    pub fn from_basis(basis: RationalMatrix) -> Result<Self, LinAlgError> {
        if basis.rank() != basis.cols() {
            return Err(LinAlgError::DependentBasis);
        }
        Ok(Subspace {
            ambient_dim: basis.rows(),
            basis,
        })
    }

    /// Span of arbitrary (possibly dependent) columns.
    pub fn span(spanning: &RationalMatrix) -> Self {
        image_basis(spanning)
    }

    /// Span of standard basis vectors `e_i`, `i ∈ idx`.
    pub fn coordinate(ambient_dim: usize, idx: &[usize]) -> Self {
        let mut basis = RationalMatrix::zeros(ambient_dim, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            basis.set(i, j, Rational::one());
        }
        Subspace { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn basis_vector(&self, j: usize) -> Vec<Rational> {
        self.basis.column(j)
    }

    fn check_ambient(&self, n: usize) -> Result<(), LinAlgError> {
        if self.ambient_dim != n {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.ambient_dim,
                found: n,
            });
        }
        Ok(())
    }

    /// Coordinates of `v` in this basis, `None` if `v` is not in the subspace.
    pub fn coordinates(&self, v: &[Rational]) -> Result<Option<Vec<Rational>>, LinAlgError> {
        self.check_ambient(v.len())?;
        Ok(solve_vec(&self.basis, v))
    }

    /// Coordinates of every column of `m`; `NotContained` if any column lies outside.
    pub fn coordinates_of(&self, m: &RationalMatrix) -> Result<RationalMatrix, LinAlgError> {
        self.check_ambient(m.rows())?;
        if m.cols() == 0 {
            return Ok(RationalMatrix::zeros(self.dim(), 0));
        }
        solve(&self.basis, m).ok_or(LinAlgError::NotContained)
    }

    pub fn contains(&self, v: &[Rational]) -> Result<bool, LinAlgError> {
        Ok(self.coordinates(v)?.is_some())
    }

    pub fn contains_all(&self, m: &RationalMatrix) -> Result<bool, LinAlgError> {
        match self.coordinates_of(m) {
            Ok(_) => Ok(true),
            Err(LinAlgError::NotContained) => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool, LinAlgError> {
        self.contains_all(&other.basis)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        self.check_ambient(other.ambient_dim)?;
        let stacked = self.basis.hstack(&-&other.basis);
        let ker = kernel_basis(&stacked);
        let coeffs = ker.basis.block(0, 0, self.dim(), ker.dim());
        Ok(Subspace::span(&(&self.basis * &coeffs)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        self.check_ambient(other.ambient_dim)?;
        Ok(Subspace::span(&self.basis.hstack(&other.basis)))
    }

    /// A complement `c` of `self` inside `larger`, so that `self ⊕ c = larger`.
    /// The complement is spanned by basis columns of `larger`.
    pub fn complement_in(&self, larger: &Subspace) -> Result<Subspace, LinAlgError> {
        self.check_ambient(larger.ambient_dim)?;
        if !larger.contains_subspace(self)? {
            return Err(LinAlgError::NotContained);
        }
        let red = rref(&self.basis.hstack(&larger.basis));
        let picked: Vec<usize> = red
            .pivots
            .iter()
            .filter(|&&p| p >= self.dim())
            .map(|&p| p - self.dim())
            .collect();
        Ok(Subspace {
            ambient_dim: self.ambient_dim,
            basis: larger.basis.select_columns(&picked),
        })
    }
}

/// Matrix of `m` restricted to `domain`, written in the basis of `codomain`.
pub fn restrict_map(
    m: &RationalMatrix,
    domain: &Subspace,
    codomain: &Subspace,
) -> Result<RationalMatrix, LinAlgError> {
    if m.cols() != domain.ambient_dim() {
        return Err(LinAlgError::DimensionMismatch {
            expected: m.cols(),
            found: domain.ambient_dim(),
        });
    }
    codomain.coordinates_of(&(m * domain.basis()))
}

/// A subquotient `numerator / denominator` with a fixed complement basis.
#[derive(Clone, Debug)]
pub struct Quotient {
    numerator: Subspace,
    denominator: Subspace,
    representatives: Subspace,
    // [representatives | denominator], used to split vectors of the numerator.
    splitting: RationalMatrix,
}

impl Quotient {
    pub fn new(numerator: Subspace, denominator: Subspace) -> Result<Self, LinAlgError> {
        let representatives = denominator.complement_in(&numerator)?;
        let splitting = representatives.basis().hstack(denominator.basis());
        Ok(Quotient {
            numerator,
            denominator,
            representatives,
            splitting,
        })
    }

    pub fn dim(&self) -> usize {
        self.representatives.dim()
    }

    pub fn numerator(&self) -> &Subspace {
        &self.numerator
    }

    pub fn denominator(&self) -> &Subspace {
        &self.denominator
    }

    pub fn representatives(&self) -> &Subspace {
        &self.representatives
    }

    /// Class coordinates of each column of `m`; every column must lie in the numerator.
    pub fn coordinates_of(&self, m: &RationalMatrix) -> Result<RationalMatrix, LinAlgError> {
        if m.rows() != self.numerator.ambient_dim() {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.numerator.ambient_dim(),
                found: m.rows(),
            });
        }
        if m.cols() == 0 {
            return Ok(RationalMatrix::zeros(self.dim(), 0));
        }
        let x = solve(&self.splitting, m).ok_or(LinAlgError::NotContained)?;
        Ok(x.block(0, 0, self.dim(), m.cols()))
    }

    pub fn coordinates(&self, v: &[Rational]) -> Result<Vec<Rational>, LinAlgError> {
        Ok(self.coordinates_of(&RationalMatrix::column_vector(v))?.column(0))
    }
}

/// Matrix of the map induced by `m` between two subquotients.
pub fn induced_quotient_map(
    m: &RationalMatrix,
    source: &Quotient,
    target: &Quotient,
) -> Result<RationalMatrix, LinAlgError> {
    if m.cols() != source.numerator.ambient_dim() {
        return Err(LinAlgError::DimensionMismatch {
            expected: m.cols(),
            found: source.numerator.ambient_dim(),
        });
    }
    if !target
        .denominator
        .contains_all(&(m * source.denominator.basis()))?
    {
        return Err(LinAlgError::NotContained);
    }
    target.coordinates_of(&(m * source.representatives.basis()))
}
