//! Exact Lenstra–Lenstra–Lovász lattice basis reduction.
//!
//! Operates on integer row vectors with all Gram–Schmidt data kept as exact
//! rationals, so the size-reduction and Lovász conditions are decided
//! without rounding error. Inputs at this crate's scale are tiny (a handful
//! of rows), so the Gram–Schmidt data is recomputed after each swap rather
//! than updated incrementally.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::QspanError;
use crate::Rational;

fn dot_big(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_big_rat(a: &[BigInt], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + Rational::from(x.clone()) * y)
}

fn dot_rat(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Nearest integer to a rational, ties rounded away from zero.
pub(crate) fn round_to_int(q: &Rational) -> BigInt {
    let (quot, rem) = q.numer().div_rem(q.denom());
    let twice = rem.abs() << 1;
    if twice >= *q.denom() && !rem.is_zero() {
        if q.numer().is_negative() {
            quot - 1
        } else {
            quot + 1
        }
    } else {
        quot
    }
}

struct Gso {
    /// mu[i][j] = <b_i, b*_j> / |b*_j|^2, lower triangular.
    mu: Vec<Vec<Rational>>,
    /// |b*_i|^2, all strictly positive for independent rows.
    norms: Vec<Rational>,
}

fn gram_schmidt(rows: &[Vec<BigInt>]) -> Result<Gso, QspanError> {
    let n = rows.len();
    let mut mu = vec![vec![Rational::zero(); n]; n];
    let mut star: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut norms: Vec<Rational> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v: Vec<Rational> = rows[i]
            .iter()
            .map(|x| Rational::from(x.clone()))
            .collect();
        for j in 0..i {
            let m = dot_big_rat(&rows[i], &star[j]) / &norms[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= &m * sk;
            }
            mu[i][j] = m;
        }
        let nrm = dot_rat(&v, &v);
        if nrm.is_zero() {
            return Err(QspanError::DependentRows);
        }
        star.push(v);
        norms.push(nrm);
    }
    Ok(Gso { mu, norms })
}

/// LLL-reduces the given independent integer rows for the given delta
/// (must satisfy 1/4 < delta < 1; the classical choice is 3/4).
///
/// The output rows span the same lattice (every step is a unimodular row
/// operation), satisfy |mu_ij| <= 1/2, and satisfy the Lovász condition.
/// Deterministic for fixed input.
pub fn lll_reduce(rows: &[Vec<BigInt>], delta: &Rational) -> Result<Vec<Vec<BigInt>>, QspanError> {
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    if *delta <= quarter || *delta >= Rational::one() {
        return Err(QspanError::BadDelta);
    }
    if rows.is_empty() {
        return Err(QspanError::EmptyInput);
    }
    let width = rows[0].len();
    if width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err(QspanError::Invalid(
            "rows must be nonempty and of equal length".into(),
        ));
    }
    if rows.len() > width {
        return Err(QspanError::DependentRows);
    }
    let mut b: Vec<Vec<BigInt>> = rows.to_vec();
    let n = b.len();
    let Gso {
        mut mu,
        mut norms,
    } = gram_schmidt(&b)?;
    let mut k = 1;
    while k < n {
        // Size-reduce b_k against b_{k-1}, ..., b_0. This leaves the
        // Gram–Schmidt vectors (hence norms) unchanged.
        for j in (0..k).rev() {
            let q = round_to_int(&mu[k][j]);
            if q.is_zero() {
                continue;
            }
            let (done, rest) = b.split_at_mut(k);
            for (cell, prior) in rest[0].iter_mut().zip(&done[j]) {
                *cell -= &q * prior;
            }
            let qr = Rational::from(q);
            let (mu_done, mu_rest) = mu.split_at_mut(k);
            for (cell, prior) in mu_rest[0].iter_mut().zip(&mu_done[j]).take(j) {
                *cell -= &qr * prior;
            }
            mu[k][j] -= qr;
        }
        // Lovász condition: |b*_k|^2 >= (delta - mu_{k,k-1}^2) |b*_{k-1}|^2.
        let m2 = &mu[k][k - 1] * &mu[k][k - 1];
        if norms[k] >= (delta - m2) * &norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            let g = gram_schmidt(&b)?;
            mu = g.mu;
            norms = g.norms;
            k = k.max(2) - 1;
        }
    }
    Ok(b)
}

/// Exact squared Euclidean norm of an integer row.
pub(crate) fn norm_sq(row: &[BigInt]) -> BigInt {
    dot_big(row, row)
}
