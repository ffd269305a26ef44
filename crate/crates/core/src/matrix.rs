//! Dense matrices generic over the scalar type.
//!
//! One container serves both arithmetic tiers: `Matrix<BigRational>` for the
//! exact computations (characteristic polynomials, kernels, ranks) and
//! `Matrix<f64>` for the numeric ones (witness verification, singular
//! values). Elimination-based operations (`rank_exact`, `kernel_exact`,
//! `solve_exact`) assume the scalar is a *field* with exact division — use
//! them with rationals, never with floats; the float tier gets ranks from
//! [`Matrix::singular_values`] with explicit thresholds instead.

use num_traits::{Float, Num, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("rows have inconsistent lengths")]
    Ragged,
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatrixError> {
        if rows.is_empty() {
            return Ok(Matrix {
                rows: 0,
                cols: 0,
                data: vec![],
            });
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Ragged);
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        Ok(Matrix {
            rows: rows_len(&data, cols),
            cols,
            data,
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.at(r, c).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

fn rows_len<T>(data: &[T], cols: usize) -> usize {
    data.len().checked_div(cols).unwrap_or(0)
}

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Block-diagonal assembly; the result dimension is the sum of the
    /// blocks' dimensions.
    pub fn block_diag(blocks: &[Matrix<T>]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(n, m);
        let (mut ro, mut co) = (0usize, 0usize);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out.set(ro + r, co + c, b.at(r, c).clone());
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        out
    }
}

impl<T: Clone + Num> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|x| x.clone() * k.clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Shape(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out: Matrix<T> = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let cur = out.at(r, c).clone();
                    out.set(r, c, cur + a.clone() * other.at(k, c).clone());
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>, MatrixError> {
        if x.len() != self.cols {
            return Err(MatrixError::Shape(format!(
                "{}x{} * vec[{}]",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    pub fn trace(&self) -> Result<T, MatrixError> {
        self.require_square()?;
        Ok((0..self.rows).fold(T::zero(), |acc, i| acc + self.at(i, i).clone()))
    }

    pub fn pow(&self, mut k: usize) -> Result<Self, MatrixError> {
        self.require_square()?;
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.rows);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    fn same_shape(&self, other: &Self) -> Result<(), MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn require_square(&self) -> Result<(), MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// Row-echelon rank by exact elimination. Only meaningful when `T` is a
    /// field with exact arithmetic (rationals, quotient fields); floats
    /// should use singular values instead.
    pub fn rank_exact(&self) -> usize {
        let (rank, _) = self.clone().echelonize();
        rank
    }

    /// Basis of the right null space `{x : Ax = 0}` by exact elimination.
    pub fn kernel_exact(&self) -> Vec<Vec<T>> {
        let (_, ech) = self.clone().echelonize();
        let mut pivot_of_col = vec![None; self.cols];
        let mut pivots = vec![];
        for (r, pc) in ech.pivots.iter().enumerate() {
            if let Some(c) = pc {
                pivot_of_col[*c] = Some(r);
                pivots.push(*c);
            }
        }
        let mut basis = vec![];
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = vec![T::zero(); self.cols];
            v[free] = T::one();
            // Back-substitute: pivot columns are normalized to 1 and the
            // echelon form is fully reduced, so each pivot variable reads off
            // directly.
            for (r, pc) in ech.pivots.iter().enumerate() {
                if let Some(c) = pc {
                    let coeff = ech.m.at(r, free).clone();
                    v[*c] = T::zero() - coeff;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// One exact solution of `Ax = b` if the system is consistent (free
    /// variables set to zero).
    pub fn solve_exact(&self, b: &[T]) -> Result<Option<Vec<T>>, MatrixError> {
        if b.len() != self.rows {
            return Err(MatrixError::Shape(format!(
                "A is {}x{}, b has {}",
                self.rows,
                self.cols,
                b.len()
            )));
        }
        // Eliminate on the augmented matrix.
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for (r, rhs) in b.iter().enumerate() {
            for c in 0..self.cols {
                aug.set(r, c, self.at(r, c).clone());
            }
            aug.set(r, self.cols, rhs.clone());
        }
        let (_, ech) = aug.echelonize();
        // Inconsistent iff a pivot lands in the augmented column.
        for pc in &ech.pivots {
            if *pc == Some(self.cols) {
                return Ok(None);
            }
        }
        let mut x = vec![T::zero(); self.cols];
        for (r, pc) in ech.pivots.iter().enumerate() {
            if let Some(c) = pc {
                x[*c] = ech.m.at(r, self.cols).clone();
            }
        }
        Ok(Some(x))
    }

    /// Reduced row echelon form; returns (rank, echelon data).
    fn echelonize(self) -> (usize, Echelon<T>) {
        let mut m = self;
        let rows = m.rows;
        let cols = m.cols;
        let mut pivots: Vec<Option<usize>> = vec![];
        let mut r = 0usize;
        for c in 0..cols {
            // First nonzero entry in column c at or below row r.
            let Some(pr) = (r..rows).find(|&i| !m.at(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    let tmp = m.at(r, j).clone();
                    let v = m.at(pr, j).clone();
                    m.set(r, j, v);
                    m.set(pr, j, tmp);
                }
            }
            let inv = T::one() / m.at(r, c).clone();
            for j in c..cols {
                let v = m.at(r, j).clone() * inv.clone();
                m.set(r, j, v);
            }
            for i in 0..rows {
                if i == r || m.at(i, c).is_zero() {
                    continue;
                }
                let f = m.at(i, c).clone();
                for j in c..cols {
                    let v = m.at(i, j).clone() - f.clone() * m.at(r, j).clone();
                    m.set(i, j, v);
                }
            }
            pivots.push(Some(c));
            r += 1;
            if r == rows {
                break;
            }
        }
        (pivots.len(), Echelon { m, pivots })
    }
}

struct Echelon<T> {
    m: Matrix<T>,
    pivots: Vec<Option<usize>>,
}

impl<T: Float> Matrix<T> {
    pub fn frobenius(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, x| acc + *x * *x)
            .sqrt()
    }

    /// Singular values by one-sided Jacobi orthogonalization, sorted
    /// descending. Deterministic: fixed sweep order, fixed iteration cap.
    pub fn singular_values(&self) -> Vec<T> {
        // Work on the tall orientation so columns are what gets orthogonalized.
        let mut b = if self.rows >= self.cols {
            self.clone()
        } else {
            self.transpose()
        };
        let n = b.cols;
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let mut app = T::zero();
                    let mut aqq = T::zero();
                    let mut apq = T::zero();
                    for r in 0..b.rows {
                        let x = *b.at(r, p);
                        let y = *b.at(r, q);
                        app = app + x * x;
                        aqq = aqq + y * y;
                        apq = apq + x * y;
                    }
                    if apq.abs() <= eps * (app * aqq).sqrt() || apq.is_zero() {
                        continue;
                    }
                    rotated = true;
                    let two = T::one() + T::one();
                    let zeta = (aqq - app) / (two * apq);
                    let t = if zeta >= T::zero() {
                        T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                    } else {
                        -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for r in 0..b.rows {
                        let x = *b.at(r, p);
                        let y = *b.at(r, q);
                        b.set(r, p, c * x - s * y);
                        b.set(r, q, s * x + c * y);
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<T> = (0..n)
            .map(|c| {
                (0..b.rows)
                    .fold(T::zero(), |acc, r| acc + *b.at(r, c) * *b.at(r, c))
                    .sqrt()
            })
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        sv
    }

    /// Numeric rank: count of singular values above `tol * sigma_max`.
    pub fn rank_tol(&self, tol: T) -> usize {
        let sv = self.singular_values();
        match sv.first() {
            None => 0,
            Some(&smax) if smax.is_zero() => 0,
            Some(&smax) => sv.iter().filter(|&&s| s > tol * smax).count(),
        }
    }
}

impl Matrix<crate::Rational> {
    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(crate::qspan::rational_to_f64)
    }
}

impl Matrix<f64> {
    /// Exact conversion: every finite f64 is a dyadic rational.
    pub fn to_rational(&self) -> Option<Matrix<crate::Rational>> {
        if self.data.iter().any(|x| !x.is_finite()) {
            return None;
        }
        Some(self.map(|x| crate::Rational::from_float(*x).expect("finite f64")))
    }
}

impl<T: Serialize> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[T]> = (0..self.rows).map(|r| self.row(r)).collect();
        rows.serialize(s)
    }
}

impl<'de, T: Deserialize<'de> + Clone> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(|e| D::Error::custom(e.to_string()))
    }
}
