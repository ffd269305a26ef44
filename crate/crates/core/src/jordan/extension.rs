//! Exact kernel dimensions over algebraic extensions of Q.
//!
//! To size the Jordan blocks of an eigenvalue that is irrational, we need
//! nullities of (T − xI)^j where x is a root of a known rational
//! polynomial f. Rather than constructing the number field explicitly, we
//! eliminate over the quotient ring Q[x]/(f) by dynamic evaluation: when a
//! candidate pivot is a zero divisor, gcd(pivot, f) splits f into two
//! branches, and we restart in the branch whose factor (numerically) owns
//! the root of interest. If no split ever occurs, the computed rank is
//! uniform across all roots of f, so following one root is always sound.

use num_traits::{One, Zero};

use super::qpoly::QPoly;
use super::JordanError;
use crate::{MatQ, Rational};

/// Nullities of (T − xI)^j for j = 1..=max_j at the root of `factor`
/// numerically closest to the seed z (given as (re, im)).
///
/// `factor` must be square-free and nonconstant. The result is exact: it
/// is the complex kernel dimension sequence of the chosen eigenvalue, and
/// its first differences count Jordan blocks of each size.
pub fn nullity_sequence_at_root(
    t: &MatQ,
    factor: &QPoly,
    z: (f64, f64),
    max_j: usize,
) -> Result<Vec<usize>, JordanError> {
    t.require_square()?;
    let n = t.rows();
    if factor.is_constant() {
        return Err(JordanError::Invalid(
            "eigenvalue factor must be nonconstant".into(),
        ));
    }
    if max_j == 0 {
        return Ok(vec![]);
    }
    let mut f = factor.monic();
    'branch: loop {
        // A = T − xI over Q[x]/(f).
        let a: Vec<Vec<QPoly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = QPoly::constant(t.at(i, j).clone());
                        if i == j {
                            c.sub(&QPoly::from_coeffs(vec![
                                Rational::zero(),
                                Rational::one(),
                            ]))
                        } else {
                            c
                        }
                        .rem(&f)
                        .expect("nonzero modulus")
                    })
                    .collect()
            })
            .collect();
        let mut power = identity_polymat(n);
        let mut nullities = Vec::with_capacity(max_j);
        for _ in 0..max_j {
            power = polymat_mul(&power, &a, &f)?;
            match rank_mod(power.clone(), &f, z)? {
                RankOutcome::Rank(r) => nullities.push(n - r),
                RankOutcome::Split(branch) => {
                    f = branch;
                    continue 'branch;
                }
            }
        }
        return Ok(nullities);
    }
}

enum RankOutcome {
    Rank(usize),
    Split(QPoly),
}

fn identity_polymat(n: usize) -> Vec<Vec<QPoly>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { QPoly::one() } else { QPoly::zero() })
                .collect()
        })
        .collect()
}

fn polymat_mul(
    a: &[Vec<QPoly>],
    b: &[Vec<QPoly>],
    f: &QPoly,
) -> Result<Vec<Vec<QPoly>>, JordanError> {
    let n = a.len();
    let mut out = vec![vec![QPoly::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                let prod = a[i][k].mul(&b[k][j]);
                out[i][j] = out[i][j].add(&prod);
            }
        }
    }
    for row in &mut out {
        for e in row {
            *e = e.rem(f)?;
        }
    }
    Ok(out)
}

/// Multiplicative inverse of p modulo f when gcd(p, f) is constant.
fn invert_mod(p: &QPoly, f: &QPoly) -> Option<QPoly> {
    let (mut r0, mut r1) = (f.clone(), p.rem(f).ok()?);
    let (mut u0, mut u1) = (QPoly::zero(), QPoly::one());
    while !r1.is_zero() {
        let (q, r) = r0.divmod(&r1).ok()?;
        let u = u0.sub(&q.mul(&u1));
        r0 = r1;
        r1 = r;
        u0 = u1;
        u1 = u;
    }
    if !r0.is_zero() && r0.is_constant() {
        let scaled = u0.scale(&(Rational::one() / r0.leading()));
        scaled.rem(f).ok()
    } else {
        None
    }
}

/// Gaussian elimination over Q[x]/(f). A zero-divisor pivot triggers a
/// split: the returned branch is the factor of f whose roots include the
/// numeric seed z.
fn rank_mod(
    mut m: Vec<Vec<QPoly>>,
    f: &QPoly,
    z: (f64, f64),
) -> Result<RankOutcome, JordanError> {
    let n = m.len();
    let mut rank = 0usize;
    for col in 0..n {
        let mut pivot = None;
        for (r, row) in m.iter().enumerate().skip(rank) {
            if row[col].is_zero() {
                continue;
            }
            let g = row[col].gcd(f);
            if g.is_constant() {
                pivot = Some(r);
                break;
            }
            // Zero divisor: f = g · (f/g), both proper. Follow z's branch.
            let other = f.exact_div(&g).ok_or_else(|| {
                JordanError::Internal("gcd fails to divide modulus".into())
            })?;
            let (gr, gi) = g.eval_complex_f64(z.0, z.1);
            let (or_, oi) = other.eval_complex_f64(z.0, z.1);
            let branch = if gr * gr + gi * gi <= or_ * or_ + oi * oi {
                g
            } else {
                other
            };
            return Ok(RankOutcome::Split(branch.monic()));
        }
        let Some(pr) = pivot else { continue };
        m.swap(rank, pr);
        let inv = invert_mod(&m[rank][col].clone(), f)
            .ok_or_else(|| JordanError::Internal("pivot not invertible".into()))?;
        let (upper, lower) = m.split_at_mut(rank + 1);
        let pivot_row = &upper[rank];
        for row in lower.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].mul(&inv).rem(f)?;
            for (c2, p) in pivot_row.iter().enumerate().skip(col) {
                if p.is_zero() {
                    continue;
                }
                let t = factor.mul(p).rem(f)?;
                row[c2] = row[c2].sub(&t);
            }
        }
        rank += 1;
        if rank == n {
            break;
        }
    }
    Ok(RankOutcome::Rank(rank))
}
