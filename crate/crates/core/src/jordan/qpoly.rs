//! Exact univariate polynomial arithmetic over Q.
//!
//! Polynomials are coefficient vectors in ascending degree order with no
//! trailing zeros (the zero polynomial is the empty vector). Everything
//! here is exact: characteristic polynomials by the Faddeev–LeVerrier
//! trace recursion, square-free decomposition by Yun's algorithm, and real
//! root counting by Sturm chains.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::JordanError;
use crate::matrix::Matrix;
use crate::{MatQ, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::from_coeffs(vec![c])
    }

    /// The monic linear polynomial x − root.
    pub fn linear(root: &Rational) -> Self {
        QPoly::from_coeffs(vec![-root.clone(), Rational::one()])
    }

    /// Ascending coefficients (no trailing zeros; empty = zero).
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree; 0 for constants including the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + crate::qspan::rational_to_f64(c);
        }
        acc
    }

    /// Horner evaluation at a complex point, in f64.
    pub fn eval_complex_f64(&self, re: f64, im: f64) -> (f64, f64) {
        let (mut ar, mut ai) = (0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            let nr = ar * re - ai * im + crate::qspan::rational_to_f64(c);
            let ni = ar * im + ai * re;
            ar = nr;
            ai = ni;
        }
        (ar, ai)
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from(BigInt::from(i)))
            .collect();
        QPoly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        QPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, k: &Rational) -> QPoly {
        QPoly::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Euclidean division: self = q·d + r with deg r < deg d.
    pub fn divmod(&self, d: &QPoly) -> Result<(QPoly, QPoly), JordanError> {
        if d.is_zero() {
            return Err(JordanError::ZeroPolynomial);
        }
        let dl = d.leading();
        let mut r = self.clone();
        let mut q = vec![Rational::zero(); self.coeffs.len().saturating_sub(d.coeffs.len()) + 1];
        while !r.is_zero() && r.degree() >= d.degree() && !d.is_constant() {
            let k = r.degree() - d.degree();
            let c = r.leading() / &dl;
            q[k] = &q[k] + &c;
            // r -= c x^k d
            let mut coeffs = r.coeffs;
            for (i, dc) in d.coeffs.iter().enumerate() {
                coeffs[i + k] = &coeffs[i + k] - &c * dc;
            }
            r = QPoly::from_coeffs(coeffs);
        }
        if d.is_constant() {
            return Ok((self.scale(&(Rational::one() / dl)), QPoly::zero()));
        }
        Ok((QPoly::from_coeffs(q), r))
    }

    pub fn rem(&self, d: &QPoly) -> Result<QPoly, JordanError> {
        Ok(self.divmod(d)?.1)
    }

    /// Some(quotient) iff d divides self exactly.
    pub fn exact_div(&self, d: &QPoly) -> Option<QPoly> {
        match self.divmod(d) {
            Ok((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        self.scale(&(Rational::one() / self.leading()))
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: returns monic pairs (g, i) with
    /// self ∝ Π g_i^i, each g_i square-free, deg g_i ≥ 1, and the roots of
    /// g_i exactly the roots of self with multiplicity i.
    pub fn squarefree_decompose(&self) -> Vec<(QPoly, usize)> {
        let f = self.monic();
        if f.is_constant() {
            return vec![];
        }
        let df = f.derivative();
        let a = f.gcd(&df);
        let mut b = f.exact_div(&a).expect("gcd divides");
        let mut d = df
            .exact_div(&a)
            .expect("gcd divides derivative")
            .sub(&b.derivative());
        let mut out = Vec::new();
        let mut i = 1usize;
        while !b.is_constant() {
            let g = b.gcd(&d);
            if !g.is_constant() {
                out.push((g.clone(), i));
            }
            b = b.exact_div(&g).expect("gcd divides");
            d = d.exact_div(&g).expect("gcd divides").sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Number of distinct real roots, by the Sturm chain (exact).
    pub fn count_real_roots(&self) -> usize {
        if self.is_constant() {
            return 0;
        }
        let mut chain = vec![self.monic(), self.derivative().monic()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]).expect("nonzero");
            chain.push(r.neg());
        }
        let sign_at_plus_inf = |p: &QPoly| p.leading().signum();
        let sign_at_minus_inf = |p: &QPoly| {
            let s = p.leading().signum();
            if p.degree() % 2 == 1 {
                -s
            } else {
                s
            }
        };
        let variations = |signs: Vec<Rational>| {
            let nz: Vec<Rational> = signs.into_iter().filter(|s| !s.is_zero()).collect();
            nz.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let v_minus = variations(chain.iter().map(sign_at_minus_inf).collect());
        let v_plus = variations(chain.iter().map(sign_at_plus_inf).collect());
        v_minus.saturating_sub(v_plus)
    }
}

/// Exact characteristic polynomial det(xI − A) via the Faddeev–LeVerrier
/// trace recursion. Costs n matrix products in rational arithmetic, hence
/// the configurable dimension bound.
pub fn char_poly(a: &MatQ, max_dim: usize) -> Result<QPoly, JordanError> {
    a.require_square()?;
    let n = a.rows();
    if n == 0 {
        return Err(JordanError::EmptyMatrix);
    }
    if n > max_dim {
        return Err(JordanError::TooLarge { dim: n, bound: max_dim });
    }
    let mut m = Matrix::identity(n);
    let mut descending = vec![Rational::one()];
    for k in 1..=n {
        let am = a.mul(&m)?;
        let c = -(am.trace()? / Rational::from(BigInt::from(k)));
        m = am.add(&Matrix::identity(n).scale(&c))?;
        descending.push(c);
    }
    descending.reverse();
    Ok(QPoly::from_coeffs(descending))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn poly(cs: &[i64]) -> QPoly {
        QPoly::from_coeffs(cs.iter().map(|&c| q(c, 1)).collect())
    }

    fn mat(rows: &[&[i64]]) -> MatQ {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn char_poly_rotation_quarter_turn() {
        let a = mat(&[&[0, -1], &[1, 0]]);
        assert_eq!(char_poly(&a, 64).unwrap(), poly(&[1, 0, 1])); // x^2 + 1
    }

    #[test]
    fn char_poly_shear() {
        let a = mat(&[&[1, 1], &[0, 1]]);
        assert_eq!(char_poly(&a, 64).unwrap(), poly(&[1, -2, 1])); // (x-1)^2
    }

    #[test]
    fn char_poly_companion_of_cubic() {
        // Companion matrix of x^3 - 2.
        let a = mat(&[&[0, 0, 2], &[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(char_poly(&a, 64).unwrap(), poly(&[-2, 0, 0, 1]));
    }

    #[test]
    fn char_poly_respects_dim_bound() {
        let a = mat(&[&[1, 0], &[0, 1]]);
        assert!(matches!(
            char_poly(&a, 1),
            Err(JordanError::TooLarge { dim: 2, bound: 1 })
        ));
    }

    #[test]
    fn divmod_and_gcd() {
        let f = poly(&[-1, 0, 1]); // x^2 - 1
        let g = poly(&[1, 1]); // x + 1
        let (quot, rem) = f.divmod(&g).unwrap();
        assert_eq!(quot, poly(&[-1, 1]));
        assert!(rem.is_zero());
        assert_eq!(f.gcd(&g), g.monic());
        let h = poly(&[2, 0, 2]); // 2x^2 + 2, coprime to f
        assert_eq!(f.gcd(&h), QPoly::one());
    }

    #[test]
    fn yun_separates_multiplicities() {
        // (x-1)^2 (x+2) = x^3 - 3x + 2.
        let f = poly(&[2, -3, 0, 1]);
        let parts = f.squarefree_decompose();
        assert_eq!(parts, vec![(poly(&[2, 1]), 1), (poly(&[-1, 1]), 2)]);
        // Multiplicity-only input: (x-1)^3.
        let g = poly(&[-1, 3, -3, 1]);
        assert_eq!(g.squarefree_decompose(), vec![(poly(&[-1, 1]), 3)]);
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(poly(&[-2, 0, 1]).count_real_roots(), 2); // x^2-2
        assert_eq!(poly(&[1, 0, 1]).count_real_roots(), 0); // x^2+1
        assert_eq!(poly(&[-2, 0, 0, 1]).count_real_roots(), 1); // x^3-2
        assert_eq!(poly(&[0, -1, 0, 1]).count_real_roots(), 3); // x^3-x
    }

    #[test]
    fn eval_forms_agree() {
        let f = poly(&[1, -3, 0, 2]);
        assert_eq!(f.eval(&q(2, 1)), q(11, 1));
        assert!((f.eval_f64(2.0) - 11.0).abs() < 1e-12);
        let (re, im) = f.eval_complex_f64(0.0, 1.0); // 1 - 3i + 0 - 2i = 1 - 5i
        assert!((re - 1.0).abs() < 1e-12);
        assert!((im + 5.0).abs() < 1e-12);
    }
}
