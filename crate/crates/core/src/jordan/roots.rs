//! Polynomial root finding with certified-width rational enclosures.
//!
//! Degree 1 and 2 factors are solved exactly (with dyadic square roots at
//! the requested precision when the discriminant is not a perfect square).
//! Higher-degree square-free factors go through Aberth–Ehrlich simultaneous
//! iteration in f64, a Sturm-chain check that the real/complex split is
//! correct, and a few exact rational Newton steps that push each root to
//! the requested precision. Error radii are a-posteriori bounds
//! deg·|p(z)/p′(z)| evaluated in exact arithmetic.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::qpoly::QPoly;
use super::JordanError;
use crate::qspan::rational_to_f64;
use crate::Rational;

/// One root of a rational polynomial: a rational enclosure of its real and
/// imaginary parts, the enclosure radius, and the algebraic multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct RootApprox {
    pub re: Rational,
    pub im: Rational,
    /// Bound on the distance to the true root; exactly 0 when re/im exact.
    pub radius: Rational,
    pub multiplicity: usize,
}

impl RootApprox {
    pub fn re_f64(&self) -> f64 {
        rational_to_f64(&self.re)
    }

    pub fn im_f64(&self) -> f64 {
        rational_to_f64(&self.im)
    }

    pub fn radius_f64(&self) -> f64 {
        rational_to_f64(&self.radius)
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

/// All complex roots of `p` with multiplicities, each located to within
/// 2^(−precision_bits+8). Conjugate symmetry is enforced: non-real roots
/// come in exact (re, ±im) pairs.
pub fn poly_roots(p: &QPoly, precision_bits: u32) -> Result<Vec<RootApprox>, JordanError> {
    if p.is_zero() {
        return Err(JordanError::ZeroPolynomial);
    }
    if p.is_constant() {
        return Err(JordanError::Invalid(
            "root finding requires degree >= 1".into(),
        ));
    }
    let mut out = Vec::new();
    for (factor, mult) in p.squarefree_decompose() {
        for mut root in squarefree_roots(&factor, precision_bits)? {
            root.multiplicity = mult;
            out.push(root);
        }
    }
    // Deterministic order: by real part, then imaginary part.
    out.sort_by(|a, b| a.re.cmp(&b.re).then(a.im.cmp(&b.im)));
    Ok(out)
}

/// Roots of a square-free polynomial, multiplicity field set to 1.
pub(crate) fn squarefree_roots(
    g: &QPoly,
    precision_bits: u32,
) -> Result<Vec<RootApprox>, JordanError> {
    match g.degree() {
        0 => Ok(vec![]),
        1 => {
            let root = -(&g.coeffs()[0] / &g.coeffs()[1]);
            Ok(vec![RootApprox {
                re: root,
                im: Rational::zero(),
                radius: Rational::zero(),
                multiplicity: 1,
            }])
        }
        2 => quadratic_roots(g, precision_bits),
        _ => aberth_roots(g, precision_bits),
    }
}

/// √x as a dyadic rational with error < 2^(−bits), flagged exact when x is
/// a perfect rational square. Requires x ≥ 0.
pub(crate) fn sqrt_rational(x: &Rational, bits: u32) -> (Rational, bool) {
    if x.is_zero() {
        return (Rational::zero(), true);
    }
    let n = x.numer();
    let d = x.denom();
    let ns = n.sqrt();
    let ds = d.sqrt();
    if &ns * &ns == *n && &ds * &ds == *d {
        return (Rational::new(ns, ds), true);
    }
    // floor(sqrt(n·d · 4^bits)) / (d · 2^bits): floor error ≤ 1 in the
    // numerator gives total error ≤ 2^(−bits).
    let scaled = (n * d) << (2 * bits as usize);
    let num = scaled.sqrt();
    (Rational::new(num, d * (BigInt::one() << bits as usize)), false)
}

fn quadratic_roots(g: &QPoly, precision_bits: u32) -> Result<Vec<RootApprox>, JordanError> {
    let c = &g.coeffs()[0];
    let b = &g.coeffs()[1];
    let a = &g.coeffs()[2];
    let two_a = a * Rational::from(BigInt::from(2));
    let mid = -(b / &two_a);
    let disc = b * b - Rational::from(BigInt::from(4)) * a * c;
    let err = Rational::new(BigInt::one(), BigInt::one() << (precision_bits as usize))
        * Rational::from(BigInt::from(4));
    if disc.is_positive() {
        let (s, exact) = sqrt_rational(&disc, precision_bits + 8);
        let half = &s / &two_a;
        let radius = if exact { Rational::zero() } else { err };
        Ok(vec![
            RootApprox {
                re: &mid - half.abs(),
                im: Rational::zero(),
                radius: radius.clone(),
                multiplicity: 1,
            },
            RootApprox {
                re: &mid + half.abs(),
                im: Rational::zero(),
                radius,
                multiplicity: 1,
            },
        ])
    } else {
        // disc < 0 (square-free quadratics cannot have disc = 0).
        let (s, exact) = sqrt_rational(&(-disc), precision_bits + 8);
        let imag = (&s / &two_a).abs();
        let radius = if exact { Rational::zero() } else { err };
        Ok(vec![
            RootApprox {
                re: mid.clone(),
                im: -imag.clone(),
                radius: radius.clone(),
                multiplicity: 1,
            },
            RootApprox {
                re: mid,
                im: imag,
                radius,
                multiplicity: 1,
            },
        ])
    }
}

/// Aberth–Ehrlich simultaneous iteration in f64 on the monic polynomial.
fn aberth_f64(coeffs: &[f64]) -> Result<Vec<Complex64>, JordanError> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    // Cauchy bound: all roots inside 1 + max |c_k| (monic input).
    let bound = 1.0
        + coeffs[..n]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| {
            // Asymmetric phase offset avoids real-axis stagnation.
            let theta = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64) + 0.4;
            Complex64::from_polar(bound * 0.5, theta)
        })
        .collect();
    let max_sweeps = 60 * n + 200;
    let mut best_moved = f64::INFINITY;
    let mut best_z = z.clone();
    for _ in 0..max_sweeps {
        let mut moved = 0.0f64;
        for j in 0..n {
            let (p, dp) = eval(z[j]);
            if p.norm() == 0.0 {
                continue;
            }
            let w = if dp.norm() == 0.0 {
                Complex64::new(1e-8, 1e-8)
            } else {
                p / dp
            };
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                if i != j {
                    let d = z[j] - z[i];
                    if d.norm() > 0.0 {
                        s += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() < 1e-300 { w } else { w / denom };
            z[j] -= step;
            moved = moved.max(step.norm() / (1.0 + z[j].norm()));
        }
        if moved < 1e-14 {
            return Ok(z);
        }
        if moved < best_moved {
            best_moved = moved;
            best_z.clone_from(&z);
        }
    }
    // Roots split out of a defective cluster jitter forever at the f64
    // evaluation-noise plateau (~eps^(1/m)), so full convergence is not
    // always attainable. A stalled configuration is still an adequate seed
    // for the exact Newton refinement that follows; only reject when the
    // iteration never settled at all.
    if best_moved < 1e-3 {
        return Ok(best_z);
    }
    Err(JordanError::RootFinding(
        "Aberth iteration did not converge".into(),
    ))
}

fn round_dyadic(q: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let scaled = (q * Rational::from(scale.clone())).to_integer();
    Rational::new(scaled, scale)
}

type CRat = (Rational, Rational);

fn c_sub(a: &CRat, b: &CRat) -> CRat {
    (&a.0 - &b.0, &a.1 - &b.1)
}

fn c_mul(a: &CRat, b: &CRat) -> CRat {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn c_div(a: &CRat, b: &CRat) -> CRat {
    let den = &b.0 * &b.0 + &b.1 * &b.1;
    (
        (&a.0 * &b.0 + &a.1 * &b.1) / &den,
        (&a.1 * &b.0 - &a.0 * &b.1) / &den,
    )
}

fn eval_complex_rat(p: &QPoly, z: &CRat) -> CRat {
    let mut acc: CRat = (Rational::zero(), Rational::zero());
    for c in p.coeffs().iter().rev() {
        acc = c_mul(&acc, z);
        acc.0 += c;
    }
    acc
}

/// Exact Newton steps rounded back to dyadics of controlled size.
fn newton_refine(g: &QPoly, dg: &QPoly, start: CRat, bits: u32, steps: usize) -> CRat {
    let mut z = start;
    let working = 2 * bits + 32;
    for _ in 0..steps {
        let p = eval_complex_rat(g, &z);
        if p.0.is_zero() && p.1.is_zero() {
            return z;
        }
        let dp = eval_complex_rat(dg, &z);
        if dp.0.is_zero() && dp.1.is_zero() {
            return z;
        }
        let q = c_div(&p, &dp);
        z = c_sub(&z, &q);
        z = (round_dyadic(&z.0, working), round_dyadic(&z.1, working));
    }
    z
}

fn aberth_roots(g: &QPoly, precision_bits: u32) -> Result<Vec<RootApprox>, JordanError> {
    let monic = g.monic();
    let n = monic.degree();
    let coeffs: Vec<f64> = monic
        .coeffs()
        .iter()
        .map(rational_to_f64)
        .collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(JordanError::RootFinding(
            "coefficients overflow f64 range".into(),
        ));
    }
    let raw = aberth_f64(&coeffs)?;
    // Sturm tells us exactly how many of the n roots are real.
    let real_count = monic.count_real_roots();
    let mut indexed: Vec<(f64, Complex64)> = raw.iter().map(|z| (z.im.abs(), *z)).collect();
    indexed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let reals: Vec<f64> = indexed[..real_count].iter().map(|(_, z)| z.re).collect();
    let rest: Vec<Complex64> = indexed[real_count..].iter().map(|(_, z)| *z).collect();
    if !rest.len().is_multiple_of(2) {
        return Err(JordanError::RootFinding(
            "conjugate pairing failed (odd complex count)".into(),
        ));
    }
    // Pair complex roots with their mirror images, greedily by conjugate
    // distance. Float noise near a defective real eigenvalue can push both
    // members of a nominal pair into the same half-plane, so no half-plane
    // balance is assumed: the mirror average (re₁+re₂)/2 ± |im₁−im₂|/2 is a
    // sound pair representative either way, and well-separated true pairs
    // (matched first, largest |im| down) always pick their real partner.
    let mut rest = rest;
    rest.sort_by(|a, b| {
        (b.im.abs(), b.re)
            .partial_cmp(&(a.im.abs(), a.re))
            .unwrap()
    });
    let mut pairs: Vec<Complex64> = Vec::with_capacity(rest.len() / 2);
    while let Some(z) = rest.first().copied() {
        rest.remove(0);
        let mirror = Complex64::new(z.re, -z.im);
        let (best, _) = rest
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (w - mirror).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .ok_or_else(|| JordanError::RootFinding("conjugate pairing failed".into()))?;
        let w = rest.swap_remove(best);
        pairs.push(Complex64::new(
            (z.re + w.re) / 2.0,
            (z.im.abs() + w.im.abs()) / 2.0,
        ));
    }
    let dg = monic.derivative();
    let from_f64 = |x: f64| Rational::from_f64_exact(x);
    let mut out = Vec::with_capacity(n);
    for re in reals {
        let seed = (from_f64(re), Rational::zero());
        let z = newton_refine(&monic, &dg, seed, precision_bits, 5);
        let radius = posterior_radius(&monic, &dg, &z, n);
        out.push(RootApprox {
            re: z.0,
            im: Rational::zero(),
            radius,
            multiplicity: 1,
        });
    }
    for z in pairs {
        let seed = (from_f64(z.re), from_f64(z.im));
        let refined = newton_refine(&monic, &dg, seed, precision_bits, 5);
        // Force im > 0 on the refined representative.
        let imag = refined.1.abs();
        let radius = posterior_radius(&monic, &dg, &(refined.0.clone(), imag.clone()), n);
        out.push(RootApprox {
            re: refined.0.clone(),
            im: -imag.clone(),
            radius: radius.clone(),
            multiplicity: 1,
        });
        out.push(RootApprox {
            re: refined.0,
            im: imag,
            radius,
            multiplicity: 1,
        });
    }
    Ok(out)
}

/// deg·|p(z)/p′(z)| bounded above by deg·(|re|+|im|) of the exact quotient.
fn posterior_radius(g: &QPoly, dg: &QPoly, z: &CRat, n: usize) -> Rational {
    let p = eval_complex_rat(g, z);
    let dp = eval_complex_rat(dg, z);
    if dp.0.is_zero() && dp.1.is_zero() {
        return Rational::one();
    }
    let q = c_div(&p, &dp);
    (q.0.abs() + q.1.abs()) * Rational::from(BigInt::from(n))
}

/// Exact rational from a finite f64 (trait helper with a crisper name).
trait FromF64Exact {
    fn from_f64_exact(x: f64) -> Rational;
}

impl FromF64Exact for Rational {
    fn from_f64_exact(x: f64) -> Rational {
        use num_traits::FromPrimitive;
        Rational::from_f64(x).expect("finite f64")
    }
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

    #[test]
    fn exact_imaginary_pair() {
        // x^2 + 1 → ±i exactly.
        let roots = poly_roots(&poly(&[1, 0, 1]), 128).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_eq!(r.re, q(0, 1));
            assert_eq!(r.im.abs(), q(1, 1));
            assert_eq!(r.radius, q(0, 1));
            assert_eq!(r.multiplicity, 1);
        }
    }

    #[test]
    fn double_root_reported_with_multiplicity() {
        // (x-1)^2.
        let roots = poly_roots(&poly(&[1, -2, 1]), 128).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].re, q(1, 1));
        assert_eq!(roots[0].multiplicity, 2);
        assert_eq!(roots[0].radius, q(0, 1));
    }

    #[test]
    fn unit_circle_pair_at_three_tenths_turn() {
        // x^2 - 2cos(2π·0.3)x + 1 with the cosine taken as a 1e-12 rational
        // approximation; roots should sit at e^(±2πi·0.3) within ~1e-12.
        let c = 2.0 * (2.0 * std::f64::consts::PI * 0.3).cos();
        let capprox = q((c * 1e12).round() as i64, 1_000_000_000_000);
        let p = QPoly::from_coeffs(vec![q(1, 1), -capprox, q(1, 1)]);
        let roots = poly_roots(&p, 128).unwrap();
        assert_eq!(roots.len(), 2);
        let theta = 2.0 * std::f64::consts::PI * 0.3;
        for r in &roots {
            assert!((r.re_f64() - theta.cos()).abs() < 1e-10);
            assert!((r.im_f64().abs() - theta.sin().abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn sqrt_rational_exactness() {
        let (s, exact) = sqrt_rational(&q(9, 4), 128);
        assert!(exact);
        assert_eq!(s, q(3, 2));
        let (s2, exact2) = sqrt_rational(&q(2, 1), 128);
        assert!(!exact2);
        let err = (&s2 * &s2 - q(2, 1)).abs();
        assert!(err < q(1, 1_000_000_000) * q(1, 1_000_000_000));
    }

    #[test]
    fn quintic_high_precision_refinement() {
        // x^5 - 2: one real root 2^(1/5), four complex. Radii must beat
        // 2^(-120); the real root must match to ~30 digits.
        let mut cs = vec![q(-2, 1)];
        cs.extend(std::iter::repeat_n(q(0, 1), 4));
        cs.push(q(1, 1));
        let p = QPoly::from_coeffs(cs);
        let roots = poly_roots(&p, 128).unwrap();
        assert_eq!(roots.len(), 5);
        let tiny = Rational::new(BigInt::one(), BigInt::one() << 120usize);
        let reals: Vec<_> = roots.iter().filter(|r| r.is_real()).collect();
        assert_eq!(reals.len(), 1);
        let bound = Rational::new(BigInt::one(), BigInt::from(10u32).pow(25));
        for r in &roots {
            assert!(r.radius < tiny, "radius too large: {:?}", r.radius_f64());
            // |z|^10 must equal 4 to well beyond f64 accuracy.
            let m2 = &r.re * &r.re + &r.im * &r.im;
            let m10 = m2.pow(5);
            assert!((m10 - q(4, 1)).abs() < bound);
        }
        // Conjugate symmetry is exact.
        let mut ims: Vec<Rational> = roots.iter().map(|r| r.im.clone()).collect();
        ims.sort();
        for i in 0..2 {
            assert_eq!(ims[i], -ims[4 - i].clone());
        }
    }

    #[test]
    fn rejects_constants() {
        assert!(poly_roots(&QPoly::zero(), 64).is_err());
        assert!(poly_roots(&poly(&[3]), 64).is_err());
    }
}
