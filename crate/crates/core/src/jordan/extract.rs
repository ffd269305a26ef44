//! Structure extraction: from a matrix to its real Jordan data.
//!
//! Two tiers share a backbone (exact characteristic polynomial →
//! square-free decomposition → roots) and differ in how block sizes and
//! eigenvalue identities are decided.
//!
//! *Exact tier* (rational matrix): block sizes come from nullities of
//! (T − x·I)^j computed over Q[x]/(g) by dynamic evaluation, so sizes and
//! kinds are exact unconditionally. Eigenvalue values are reconstructed
//! exactly when possible: rational roots via continued-fraction
//! convergents verified by exact evaluation, conjugate pairs via their
//! monic quadratic x² − s·x + n with rational s, n verified by exact
//! division. A reconstructed pair's angle is exact when its rational
//! cos² = s²/(4n) lands in the classical table {0, 1/4, 1/2, 3/4} —
//! and when it does not, the angle is *certified irrational*, since a
//! rational number of turns with rational cos² admits no other values.
//!
//! *Numeric tier* (f64 matrix): entries are rationalized exactly (every
//! finite f64 is dyadic) so the characteristic polynomial and square-free
//! structure are still exact; roots are then clustered by single linkage
//! at distance `tol`, and block sizes come from SVD nullities of
//! (T − λI)^j, or of ((T−αI)² + β²I)^j for conjugate pairs, whose real
//! kernels are even-dimensional. Inconsistent rank profiles are reported,
//! not guessed at.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::extension::nullity_sequence_at_root;
use super::qpoly::char_poly;
use super::roots::{squarefree_roots, RootApprox};
use super::{
    AngleTurns, BlockKind, JordanBlock, JordanError, JordanStructure, QPoly, RealValue,
    StructureSource,
};
use crate::config::Config;
use crate::matrix::Matrix;
use crate::qspan::{ExactReal, IrrationalBasis};
use crate::{MatF, MatQ, Rational};

/// Input matrix with its exactness tier made explicit.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixInput {
    Exact(MatQ),
    Numeric(MatF),
}

impl MatrixInput {
    pub fn dimension(&self) -> usize {
        match self {
            MatrixInput::Exact(m) => m.rows(),
            MatrixInput::Numeric(m) => m.rows(),
        }
    }

    pub fn to_f64(&self) -> MatF {
        match self {
            MatrixInput::Exact(m) => m.to_f64(),
            MatrixInput::Numeric(m) => m.clone(),
        }
    }
}

/// Extracts the real Jordan structure, dispatching on the input tier.
pub fn extract_structure(
    input: &MatrixInput,
    cfg: &Config,
) -> Result<JordanStructure, JordanError> {
    match input {
        MatrixInput::Exact(m) => extract_structure_exact(m, cfg),
        MatrixInput::Numeric(m) => extract_structure_f64(m, cfg),
    }
}

/// Exact-tier extraction. Block sizes and kinds are exact; values stay
/// exact when rational (or, for pairs, when trace and norm are rational).
pub fn extract_structure_exact(m: &MatQ, cfg: &Config) -> Result<JordanStructure, JordanError> {
    m.require_square()?;
    if m.rows() == 0 {
        return Err(JordanError::EmptyMatrix);
    }
    let bits = cfg.precision_bits.max(64);
    let p = char_poly(m, cfg.max_dim)?;
    let mut blocks = Vec::new();
    for (g, mult) in p.squarefree_decompose() {
        for root in squarefree_roots(&g, bits)? {
            if root.im.is_negative() {
                // The lower half root rides with its mirror.
                continue;
            }
            let sizes = if mult == 1 {
                vec![1usize]
            } else {
                let z = (root.re_f64(), root.im_f64());
                let nulls = nullity_sequence_at_root(m, &g, z, mult)?;
                block_sizes_from_nullities(&nulls, mult)
                    .map_err(JordanError::Internal)?
            };
            let kind = if root.is_real() {
                real_kind(&g, &root, bits)
            } else {
                pair_kind(&g, &root)
            };
            for size in sizes {
                blocks.push(JordanBlock {
                    size,
                    kind: kind.clone(),
                });
            }
        }
    }
    JordanStructure::new(blocks, StructureSource::Exact)
}

/// Numeric-tier extraction at tolerance `cfg.tol`.
pub fn extract_structure_f64(m: &MatF, cfg: &Config) -> Result<JordanStructure, JordanError> {
    m.require_square()?;
    let n = m.rows();
    if n == 0 {
        return Err(JordanError::EmptyMatrix);
    }
    let mq = m.to_rational().ok_or(JordanError::NonFinite)?;
    let bits = cfg.precision_bits.max(64);
    let tol = cfg.tol;
    let p = char_poly(&mq, cfg.max_dim)?;
    let mut roots: Vec<RootApprox> = Vec::new();
    for (g, mult) in p.squarefree_decompose() {
        for mut r in squarefree_roots(&g, bits)? {
            r.multiplicity = mult;
            roots.push(r);
        }
    }
    let mut blocks = Vec::new();
    for members in cluster_roots(&roots, tol) {
        let total: usize = members.iter().map(|&i| roots[i].multiplicity).sum();
        let weight = total as f64;
        let re = members
            .iter()
            .map(|&i| roots[i].re_f64() * roots[i].multiplicity as f64)
            .sum::<f64>()
            / weight;
        let im = members
            .iter()
            .map(|&i| roots[i].im_f64() * roots[i].multiplicity as f64)
            .sum::<f64>()
            / weight;
        if im < -tol {
            // The mirrored cluster produces the block.
            continue;
        }
        if im.abs() <= tol {
            // Real eigenvalue (conjugate halves of borderline pairs sit in
            // the same cluster by symmetry, so `total` counts them both).
            let sizes = real_sizes_f64(m, re, total, tol)?;
            for size in sizes {
                blocks.push(JordanBlock {
                    size,
                    kind: BlockKind::Split {
                        value: RealValue::Approx(re),
                    },
                });
            }
        } else {
            let sizes = pair_sizes_f64(m, re, im, total, tol)?;
            let turns = f64::atan2(im, re) / std::f64::consts::TAU;
            for size in sizes {
                blocks.push(JordanBlock {
                    size,
                    kind: BlockKind::Rotation {
                        radius_sq: RealValue::Approx(re * re + im * im),
                        angle: AngleTurns::Numeric {
                            turns,
                            irrational_certified: false,
                        },
                    },
                });
            }
        }
    }
    JordanStructure::new(blocks, StructureSource::Numeric { tol })
}

/// Split-block sizes at real eigenvalue λ from SVD nullities of (T−λI)^j.
fn real_sizes_f64(
    m: &MatF,
    lambda: f64,
    total: usize,
    tol: f64,
) -> Result<Vec<usize>, JordanError> {
    if total == 1 {
        return Ok(vec![1]);
    }
    let n = m.rows();
    let a = m
        .sub(&Matrix::identity(n).scale(&lambda))
        .expect("same shape");
    let nulls = nullity_profile(&a, n, total, tol);
    block_sizes_from_nullities(&nulls, total).map_err(|detail| JordanError::ExtractionFailed {
        tol,
        detail,
        profile: nulls.clone(),
    })
}

/// Rotation-block sizes at the pair α ± βi from SVD nullities of
/// ((T−αI)² + β²I)^j; real kernels are even-dimensional, two per block.
fn pair_sizes_f64(
    m: &MatF,
    alpha: f64,
    beta: f64,
    total: usize,
    tol: f64,
) -> Result<Vec<usize>, JordanError> {
    if total == 1 {
        return Ok(vec![1]);
    }
    let n = m.rows();
    let q = m
        .mul(m)
        .expect("square")
        .sub(&m.scale(&(2.0 * alpha)))
        .expect("same shape")
        .add(&Matrix::identity(n).scale(&(alpha * alpha + beta * beta)))
        .expect("same shape");
    let nulls = nullity_profile(&q, n, total, tol);
    let mut halved = Vec::with_capacity(nulls.len());
    for &k in &nulls {
        if k % 2 != 0 {
            return Err(JordanError::ExtractionFailed {
                tol,
                detail: format!("odd kernel dimension {k} at a conjugate pair"),
                profile: nulls.clone(),
            });
        }
        halved.push(k / 2);
    }
    block_sizes_from_nullities(&halved, total).map_err(|detail| {
        JordanError::ExtractionFailed {
            tol,
            detail,
            profile: nulls.clone(),
        }
    })
}

/// dim ker(A^j) for j = 1..=cap. The zero cutoff is absolute, scaled as
/// (tol·max(1, ‖A‖_F))^j: when the whole matrix A = T − λI is tiny (T
/// indistinguishable from λI at tolerance), a cutoff relative to σ_max
/// would wrongly report full rank.
fn nullity_profile(a: &MatF, n: usize, cap: usize, tol: f64) -> Vec<usize> {
    let base = tol * a.frobenius().max(1.0);
    let mut nulls = Vec::with_capacity(cap);
    let mut power = a.clone();
    for j in 1..=cap {
        let sv = power.singular_values();
        let smax = sv.first().copied().unwrap_or(0.0);
        let cut = base.powi(j as i32).max(smax * 1e-12);
        let null = n - sv.iter().filter(|&&s| s > cut).count();
        nulls.push(null);
        if j < cap {
            power = power.mul(a).expect("square");
        }
    }
    nulls
}

/// Converts a nullity sequence (dim ker A^j for j = 1..) into the block
/// size multiset, validating the staircase shape: increments Δ_j count
/// blocks of size ≥ j, so they must be non-increasing and sum to the
/// algebraic multiplicity.
fn block_sizes_from_nullities(nulls: &[usize], total: usize) -> Result<Vec<usize>, String> {
    let mut deltas = Vec::with_capacity(nulls.len());
    let mut prev = 0usize;
    for &nj in nulls {
        if nj < prev {
            return Err(format!("kernel dimensions decreased: {nulls:?}"));
        }
        deltas.push(nj - prev);
        prev = nj;
    }
    for w in deltas.windows(2) {
        if w[1] > w[0] {
            return Err(format!("kernel increments grew: {nulls:?}"));
        }
    }
    let sum: usize = deltas.iter().sum();
    if sum != total {
        return Err(format!(
            "block sizes sum to {sum} but the algebraic multiplicity is {total}"
        ));
    }
    let mut sizes = Vec::new();
    for msize in (1..=deltas.len()).rev() {
        let here = deltas[msize - 1];
        let next = if msize < deltas.len() { deltas[msize] } else { 0 };
        for _ in 0..(here - next) {
            sizes.push(msize);
        }
    }
    Ok(sizes)
}

/// Kind of a real root of the square-free factor `g`: exact if a rational
/// value inside the root's enclosure actually satisfies g = 0.
///
/// Any rational root whose denominator fits in the working precision is
/// recovered (it appears among the continued-fraction convergents of the
/// enclosure center); reconstruction failure therefore means the value is
/// irrational for every input of realistic height, and the value is kept
/// numeric.
fn real_kind(g: &QPoly, root: &RootApprox, bits: u32) -> BlockKind {
    let tol = &root.radius * Rational::from_integer(BigInt::from(4));
    for cand in convergents(&root.re, 2 * bits as usize) {
        if too_tall(&cand, bits) {
            continue;
        }
        if (&cand - &root.re).abs() <= tol && g.eval(&cand).is_zero() {
            return BlockKind::Split {
                value: RealValue::Exact(cand),
            };
        }
    }
    BlockKind::Split {
        value: RealValue::Approx(root.re_f64()),
    }
}

/// Kind of the conjugate pair α ± βi (β > 0) rooted in the square-free
/// factor `g`. Exact when the pair's monic quadratic x² − s·x + n has
/// rational s = 2α and n = α² + β² and divides g exactly; the angle then
/// follows from cos² θ = s²/(4n).
fn pair_kind(g: &QPoly, root: &RootApprox) -> BlockKind {
    // Degree-2 factors hand us s and n directly from the coefficients,
    // exactly, even when β itself is irrational.
    let (s, n) = if g.degree() == 2 {
        let c = g.coeffs();
        (-(&c[1] / &c[2]), &c[0] / &c[2])
    } else {
        match reconstruct_pair_quadratic(g, root) {
            Some(sn) => sn,
            None => return approx_pair_kind(root, false),
        }
    };
    let four = Rational::from_integer(BigInt::from(4));
    let cos_sq = (&s * &s) / (&four * &n);
    match rational_cosine_turns(&cos_sq, !s.is_negative()) {
        Some(turns) => BlockKind::Rotation {
            radius_sq: RealValue::Exact(n),
            angle: AngleTurns::Exact(ExactReal::from_rational(IrrationalBasis::rational(), turns)),
        },
        None => BlockKind::Rotation {
            radius_sq: RealValue::Exact(n),
            // A rational number of turns with rational cos² can only have
            // cos² ∈ {0, 1/4, 1/2, 3/4, 1}; missing the table proves the
            // angle irrational even though its value stays numeric.
            angle: AngleTurns::Numeric {
                turns: numeric_turns(root),
                irrational_certified: true,
            },
        },
    }
}

fn approx_pair_kind(root: &RootApprox, irrational_certified: bool) -> BlockKind {
    let (re, im) = (root.re_f64(), root.im_f64());
    BlockKind::Rotation {
        radius_sq: RealValue::Approx(re * re + im * im),
        angle: AngleTurns::Numeric {
            turns: numeric_turns(root),
            irrational_certified,
        },
    }
}

fn numeric_turns(root: &RootApprox) -> f64 {
    f64::atan2(root.im_f64().abs(), root.re_f64()) / std::f64::consts::TAU
}

/// Searches rational candidates for s = 2α and n = α² + β² near the
/// enclosure and verifies x² − s·x + n | g by exact division.
fn reconstruct_pair_quadratic(g: &QPoly, root: &RootApprox) -> Option<(Rational, Rational)> {
    let two = Rational::from_integer(BigInt::from(2));
    let four = Rational::from_integer(BigInt::from(4));
    let s_center = &two * &root.re;
    let n_center = &root.re * &root.re + &root.im * &root.im;
    let scale = Rational::one() + root.re.abs() + root.im.abs();
    let s_tol = &four * &root.radius;
    let n_tol = &four * &root.radius * &scale + &four * &root.radius * &root.radius;
    let bits = 128u32;
    let s_cands = near_candidates(&s_center, &s_tol, bits);
    let n_cands = near_candidates(&n_center, &n_tol, bits);
    for s in &s_cands {
        for n in &n_cands {
            // Genuine pair: negative discriminant.
            if s * s >= &four * n {
                continue;
            }
            let q = QPoly::from_coeffs(vec![n.clone(), -s.clone(), Rational::one()]);
            if let Ok((_, rem)) = g.divmod(&q) {
                if rem.is_zero() {
                    return Some((s.clone(), n.clone()));
                }
            }
        }
    }
    None
}

/// Continued-fraction convergents of `x` within `tol`, small heights only.
fn near_candidates(x: &Rational, tol: &Rational, bits: u32) -> Vec<Rational> {
    let mut out = Vec::new();
    for cand in convergents(x, 2 * bits as usize) {
        if too_tall(&cand, bits) {
            continue;
        }
        if (&cand - x).abs() <= *tol {
            out.push(cand);
            if out.len() >= 4 {
                break;
            }
        }
    }
    out
}

fn too_tall(q: &Rational, bits: u32) -> bool {
    q.denom().bits() > bits as u64 || q.numer().bits() > 4 * bits as u64
}

/// Continued-fraction convergents of a rational number, in order; the last
/// one is the number itself.
fn convergents(x: &Rational, limit: usize) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut h_prev = BigInt::one();
    let mut h_pp = BigInt::zero();
    let mut k_prev = BigInt::zero();
    let mut k_pp = BigInt::one();
    let mut rem = x.clone();
    for _ in 0..limit {
        let a = rem.floor().to_integer();
        let h = &a * &h_prev + &h_pp;
        let k = &a * &k_prev + &k_pp;
        out.push(Rational::new(h.clone(), k.clone()));
        h_pp = std::mem::replace(&mut h_prev, h);
        k_pp = std::mem::replace(&mut k_prev, k);
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rem = frac.recip();
    }
    out
}

/// The rational-cosine table: for θ = 2πα with α a *rational* number of
/// turns, cos²θ rational forces cos²θ ∈ {0, 1/4, 1/2, 3/4, 1} (2·cos 2θ is
/// a rational algebraic integer). With θ ∈ (0, π) and the sign of cos θ
/// known, each table value pins the angle exactly; any other rational
/// cos² certifies the angle irrational.
fn rational_cosine_turns(cos_sq: &Rational, cos_nonneg: bool) -> Option<Rational> {
    let q = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
    if cos_sq.is_zero() {
        return Some(q(1, 4));
    }
    if *cos_sq == q(1, 4) {
        return Some(if cos_nonneg { q(1, 6) } else { q(1, 3) });
    }
    if *cos_sq == q(1, 2) {
        return Some(if cos_nonneg { q(1, 8) } else { q(3, 8) });
    }
    if *cos_sq == q(3, 4) {
        return Some(if cos_nonneg { q(1, 12) } else { q(5, 12) });
    }
    None
}

/// Single-linkage clustering of roots in the complex plane at distance
/// `tol`; returns index groups.
fn cluster_roots(roots: &[RootApprox], tol: f64) -> Vec<Vec<usize>> {
    let k = roots.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let dre = roots[i].re_f64() - roots[j].re_f64();
            let dim = roots[i].im_f64() - roots[j].im_f64();
            if (dre * dre + dim * dim).sqrt() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..k {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups
}
