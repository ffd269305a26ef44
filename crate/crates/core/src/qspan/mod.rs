//! Exact arithmetic in finitely generated Q-vector spaces of real numbers.
//!
//! A real number is represented as a rational coordinate vector over a
//! declared [`IrrationalBasis`] whose first symbol is always the constant 1.
//! Declaring a basis *asserts* that its symbols are linearly independent
//! over Q; nothing verifies that assertion, and every exact answer in this
//! module is conditional on it. That is the standing assumption the rest of
//! the crate inherits (reports surface it as provenance).
//!
//! The module answers two families of questions:
//!
//! - exact ones, by rational linear algebra on coordinates:
//!   [`span_membership`], [`full_support_relation`], [`moment_curve_rank`];
//! - heuristic ones, by lattice reduction on scaled numeric approximations:
//!   [`lll_reduce`] and [`detect_relation_numeric`]. A heuristic `Found` is
//!   certain only up to the measured residual; a heuristic "none" is only
//!   "none up to the given height at the given precision".

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::Rational;

mod lll;
mod relation;

pub use lll::lll_reduce;
pub use relation::{
    detect_relation_numeric, detect_relation_rational, numeric_span_membership, relation_rows,
};

#[derive(Debug, Error, PartialEq)]
pub enum QspanError {
    #[error("basis mismatch")]
    BasisMismatch,
    #[error("invalid basis: {0}")]
    BadBasis(String),
    #[error("empty input")]
    EmptyInput,
    #[error("points must be distinct")]
    DuplicatePoints,
    #[error("input must be finite")]
    NonFiniteInput,
    #[error("basis rows are linearly dependent")]
    DependentRows,
    #[error("delta must satisfy 1/4 < delta < 1")]
    BadDelta,
    #[error("unknown symbol: {0}")]
    UnknownSymbol(String),
    #[error("{0}")]
    Invalid(String),
}

/// Names of the built-in irrational symbols with high-precision values.
pub const BUILTIN_SYMBOLS: &[&str] = &["sqrt2", "sqrt3", "sqrt5", "log2_3"];

/// One named basis element together with its numeric approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSymbol {
    pub name: String,
    /// Dyadic/rational approximation, accurate to the basis precision.
    #[serde(with = "ser::rational")]
    pub approx: Rational,
    /// For user-declared symbols: the decimal literal the approximation was
    /// parsed from, kept so serialized values reconstruct identically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimal: Option<String>,
}

/// A declared Q-linearly-independent family of reals, led by the constant 1.
///
/// Independence of the symbols is an assumption recorded at construction,
/// not a verified fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrationalBasis {
    symbols: Vec<BasisSymbol>,
    precision_bits: u32,
}

impl IrrationalBasis {
    /// Builds a basis from (name, approximation) pairs. The first symbol
    /// must be the constant `1` with approximation exactly 1.
    pub fn new(
        symbols: Vec<(String, Rational)>,
        precision_bits: u32,
    ) -> Result<Arc<Self>, QspanError> {
        if symbols.is_empty() {
            return Err(QspanError::BadBasis("basis must not be empty".into()));
        }
        if symbols[0].0 != "1" || !symbols[0].1.is_one() {
            return Err(QspanError::BadBasis(
                "first basis symbol must be the constant 1".into(),
            ));
        }
        for i in 0..symbols.len() {
            for j in (i + 1)..symbols.len() {
                if symbols[i].0 == symbols[j].0 {
                    return Err(QspanError::BadBasis(format!(
                        "duplicate symbol: {}",
                        symbols[i].0
                    )));
                }
            }
        }
        Ok(Arc::new(IrrationalBasis {
            symbols: symbols
                .into_iter()
                .map(|(name, approx)| BasisSymbol {
                    name,
                    approx,
                    decimal: None,
                })
                .collect(),
            precision_bits,
        }))
    }

    /// Like [`IrrationalBasis::new`] but keeping the decimal source string
    /// of user-declared symbols (for faithful serialization).
    pub fn new_with_sources(
        symbols: Vec<(String, Rational, Option<String>)>,
        precision_bits: u32,
    ) -> Result<Arc<Self>, QspanError> {
        let plain: Vec<(String, Rational)> = symbols
            .iter()
            .map(|(n, a, _)| (n.clone(), a.clone()))
            .collect();
        let validated = IrrationalBasis::new(plain, precision_bits)?;
        let mut basis = (*validated).clone();
        for (sym, (_, _, dec)) in basis.symbols.iter_mut().zip(symbols) {
            sym.decimal = dec;
        }
        Ok(Arc::new(basis))
    }

    /// The trivial basis `{1}`: pure rationals.
    pub fn rational() -> Arc<Self> {
        IrrationalBasis::new(vec![("1".into(), Rational::one())], 64).expect("valid")
    }

    /// Basis `{1} ∪ names` resolving each name against the built-in table.
    pub fn with_builtins(names: &[&str], precision_bits: u32) -> Result<Arc<Self>, QspanError> {
        let mut symbols = vec![("1".to_string(), Rational::one())];
        for name in names {
            let approx = builtin_symbol(name, precision_bits)
                .ok_or_else(|| QspanError::UnknownSymbol((*name).into()))?;
            symbols.push(((*name).to_string(), approx));
        }
        IrrationalBasis::new(symbols, precision_bits)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[BasisSymbol] {
        &self.symbols
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// Structural equality check used for the "mixed bases" guard.
    fn same_as(&self, other: &IrrationalBasis) -> bool {
        self.symbols.len() == other.symbols.len()
            && self
                .symbols
                .iter()
                .zip(&other.symbols)
                .all(|(a, b)| a.name == b.name && a.approx == b.approx)
    }
}

/// An element of the Q-span of a declared basis: exact rational coordinates.
#[derive(Debug, Clone)]
pub struct ExactReal {
    basis: Arc<IrrationalBasis>,
    coords: Vec<Rational>,
}

impl PartialEq for ExactReal {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_as(&other.basis) && self.coords == other.coords
    }
}

impl ExactReal {
    pub fn new(basis: Arc<IrrationalBasis>, coords: Vec<Rational>) -> Result<Self, QspanError> {
        if coords.len() != basis.len() {
            return Err(QspanError::Invalid(format!(
                "expected {} coordinates, got {}",
                basis.len(),
                coords.len()
            )));
        }
        Ok(ExactReal { basis, coords })
    }

    pub fn from_rational(basis: Arc<IrrationalBasis>, q: Rational) -> Self {
        let mut coords = vec![Rational::zero(); basis.len()];
        coords[0] = q;
        ExactReal { basis, coords }
    }

    /// Coordinate 1 on the named symbol, 0 elsewhere.
    pub fn symbol(basis: Arc<IrrationalBasis>, name: &str) -> Result<Self, QspanError> {
        let idx = basis
            .index_of(name)
            .ok_or_else(|| QspanError::UnknownSymbol(name.into()))?;
        let mut coords = vec![Rational::zero(); basis.len()];
        coords[idx] = Rational::one();
        Ok(ExactReal { basis, coords })
    }

    pub fn basis(&self) -> &Arc<IrrationalBasis> {
        &self.basis
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn same_basis(&self, other: &ExactReal) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || self.basis.same_as(&other.basis)
    }

    /// Exact dot product of coordinates with the basis approximations.
    pub fn approx(&self) -> Rational {
        self.coords
            .iter()
            .zip(self.basis.symbols())
            .fold(Rational::zero(), |acc, (c, s)| acc + c * &s.approx)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.approx())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// `Some(q)` iff the element is rational (all irrational coordinates 0).
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn add(&self, other: &ExactReal) -> Result<ExactReal, QspanError> {
        if !self.same_basis(other) {
            return Err(QspanError::BasisMismatch);
        }
        Ok(ExactReal {
            basis: self.basis.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &ExactReal) -> Result<ExactReal, QspanError> {
        if !self.same_basis(other) {
            return Err(QspanError::BasisMismatch);
        }
        Ok(ExactReal {
            basis: self.basis.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn neg(&self) -> ExactReal {
        ExactReal {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> ExactReal {
        ExactReal {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add_rational(&self, q: &Rational) -> ExactReal {
        let mut coords = self.coords.clone();
        coords[0] = &coords[0] + q;
        ExactReal {
            basis: self.basis.clone(),
            coords,
        }
    }

    /// Reduces modulo 1 into `[0, 1)` by subtracting the floor of the
    /// numeric approximation (an exact integer shift on the constant
    /// coordinate). Correct as long as the true value is not closer to an
    /// integer than the basis approximation error — the standing declared-
    /// approximation assumption.
    pub fn mod_one(&self) -> ExactReal {
        let fl = self.approx().floor();
        self.add_rational(&(-fl))
    }

    /// Re-expresses the element over a larger basis containing (by name,
    /// with identical approximations) every symbol this element touches.
    pub fn embed(&self, target: &Arc<IrrationalBasis>) -> Result<ExactReal, QspanError> {
        let mut coords = vec![Rational::zero(); target.len()];
        for (c, sym) in self.coords.iter().zip(self.basis.symbols()) {
            if c.is_zero() {
                continue;
            }
            let idx = target
                .index_of(&sym.name)
                .ok_or_else(|| QspanError::UnknownSymbol(sym.name.clone()))?;
            if target.symbols()[idx].approx != sym.approx {
                return Err(QspanError::BadBasis(format!(
                    "symbol {} has conflicting approximations",
                    sym.name
                )));
            }
            coords[idx] = c.clone();
        }
        Ok(ExactReal {
            basis: target.clone(),
            coords,
        })
    }
}

/// Whether an answer is unconditionally correct (modulo the declared-basis
/// assumption) or bounded by numeric search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certainty {
    Exact,
    Heuristic,
}

/// Result payload of a relation search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationOutcome {
    /// Integer relation `s_1 a_1 + ... + s_k a_k = t`.
    Found {
        #[serde(with = "ser::int_vec")]
        s: Vec<BigInt>,
        #[serde(with = "ser::int")]
        t: BigInt,
        /// Measured |Σ s_j a_j − t|; exactly zero for exact certificates.
        residual: f64,
    },
    NoneUpToHeight,
}

/// Outcome of a relation search together with the bounds that qualify it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCertificate {
    #[serde(flatten)]
    pub outcome: RelationOutcome,
    pub certainty: Certainty,
    /// Max absolute coefficient searched; `None` for exhaustive (exact) runs.
    pub height_bound: Option<u64>,
    /// Scaling precision used by the numeric engine, when it ran.
    pub precision_bits: Option<u32>,
}

impl RelationCertificate {
    pub fn found(&self) -> bool {
        matches!(self.outcome, RelationOutcome::Found { .. })
    }

    /// Exact verification of a Found certificate against ExactReal inputs:
    /// Σ s_j a_j − t must vanish coordinatewise.
    pub fn verify_exact(&self, alphas: &[ExactReal]) -> Result<bool, QspanError> {
        let RelationOutcome::Found { s, t, .. } = &self.outcome else {
            return Ok(false);
        };
        if s.len() != alphas.len() || alphas.is_empty() {
            return Err(QspanError::Invalid(
                "coefficient count does not match input".into(),
            ));
        }
        let basis = alphas[0].basis().clone();
        let mut acc = ExactReal::from_rational(basis, -Rational::from(t.clone()));
        for (sj, aj) in s.iter().zip(alphas) {
            acc = acc.add(&aj.scale(&Rational::from(sj.clone())))?;
        }
        Ok(acc.is_zero())
    }
}

/// Rational coefficients expressing a target inside `span{1} ∪ family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanCoefficients {
    #[serde(with = "ser::rational")]
    pub constant: Rational,
    #[serde(with = "ser::rational_vec")]
    pub family: Vec<Rational>,
}

/// Decides whether `target ∈ span_Q({1} ∪ family)` by exact elimination on
/// coordinates; returns the witnessing coefficients when it is.
///
/// The constant 1 is always adjoined, so a rational target is a member of
/// the span of any family (including the empty one).
pub fn span_membership(
    target: &ExactReal,
    family: &[ExactReal],
) -> Result<Option<SpanCoefficients>, QspanError> {
    for f in family {
        if !target.same_basis(f) {
            return Err(QspanError::BasisMismatch);
        }
    }
    let dim = target.basis().len();
    // Columns: coords(1), then coords of each family member; RHS: target.
    let mut cols: Vec<Vec<Rational>> = Vec::with_capacity(1 + family.len());
    let mut one = vec![Rational::zero(); dim];
    one[0] = Rational::one();
    cols.push(one);
    for f in family {
        cols.push(f.coords().to_vec());
    }
    let mut rows = Vec::with_capacity(dim);
    for r in 0..dim {
        rows.push(cols.iter().map(|c| c[r].clone()).collect::<Vec<_>>());
    }
    let a = Matrix::from_rows(rows).expect("rectangular by construction");
    match a
        .solve_exact(target.coords())
        .map_err(|e| QspanError::Invalid(e.to_string()))?
    {
        None => Ok(None),
        Some(sol) => Ok(Some(SpanCoefficients {
            constant: sol[0].clone(),
            family: sol[1..].to_vec(),
        })),
    }
}

/// Finds an integer relation `Σ s_j a_j = t` with **every** `s_j` nonzero,
/// or certifies (exactly) that none exists.
///
/// The solution set is the rational kernel of the coordinate equations; a
/// full-support element is located by deterministic geometric weight
/// combinations of a kernel basis, which provably terminates whenever the
/// kernel supports cover all k positions.
pub fn full_support_relation(alphas: &[ExactReal]) -> Result<RelationCertificate, QspanError> {
    if alphas.is_empty() {
        return Err(QspanError::EmptyInput);
    }
    for a in alphas {
        if !alphas[0].same_basis(a) {
            return Err(QspanError::BasisMismatch);
        }
    }
    let k = alphas.len();
    let dim = alphas[0].basis().len();
    // Unknowns (s_1..s_k, t) with Σ s_j a_j − t·1 = 0, one equation per
    // basis coordinate.
    let mut rows = Vec::with_capacity(dim);
    for r in 0..dim {
        let mut row: Vec<Rational> = alphas.iter().map(|a| a.coords()[r].clone()).collect();
        row.push(if r == 0 {
            -Rational::one()
        } else {
            Rational::zero()
        });
        rows.push(row);
    }
    let a = Matrix::from_rows(rows).expect("rectangular");
    let kernel = a.kernel_exact();
    let exact_none = RelationCertificate {
        outcome: RelationOutcome::NoneUpToHeight,
        certainty: Certainty::Exact,
        height_bound: None,
        precision_bits: None,
    };
    if kernel.is_empty() {
        return Ok(exact_none);
    }
    let gens: Vec<Vec<BigInt>> = kernel.iter().map(|v| primitive_integer_vector(v)).collect();
    // A full-support vector exists iff every s-position is nonzero in some
    // generator.
    for j in 0..k {
        if gens.iter().all(|g| g[j].is_zero()) {
            return Ok(exact_none);
        }
    }
    // Geometric weights (1, w, w^2, ...): coordinate j is a nonzero
    // polynomial in w of degree < #generators, so a small w must work.
    let max_w = (gens.len() * k + 2).max(16);
    for w in 1..=max_w as u64 {
        let wi = BigInt::from(w);
        let mut combo = vec![BigInt::zero(); k + 1];
        let mut weight = BigInt::one();
        for g in &gens {
            for (c, gc) in combo.iter_mut().zip(g) {
                *c += &weight * gc;
            }
            weight *= &wi;
        }
        if combo[..k].iter().all(|c| !c.is_zero()) {
            let combo = normalize_relation(combo);
            let (s, t) = (combo[..k].to_vec(), combo[k].clone());
            let cert = RelationCertificate {
                outcome: RelationOutcome::Found {
                    s,
                    t,
                    residual: 0.0,
                },
                certainty: Certainty::Exact,
                height_bound: None,
                precision_bits: None,
            };
            debug_assert!(cert.verify_exact(alphas).unwrap_or(false));
            return Ok(cert);
        }
    }
    Err(QspanError::Invalid(
        "full-support combination search failed to terminate".into(),
    ))
}

/// Clears denominators and divides by the gcd: smallest integer vector on
/// the same rational line.
pub(crate) fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for q in v {
        lcm = lcm.lcm(q.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|q| (q * Rational::from(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Sign convention: make `t` (= last entry) positive; if t = 0, make the
/// first nonzero coefficient positive.
pub(crate) fn normalize_relation(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let flip = match v.last() {
        Some(t) if t.is_negative() => true,
        Some(t) if t.is_zero() => v
            .iter()
            .find(|x| !x.is_zero())
            .map(|x| x.is_negative())
            .unwrap_or(false),
        _ => false,
    };
    if flip {
        for x in &mut v {
            *x = -x.clone();
        }
    }
    v
}

/// Rank of the n×n Vandermonde matrix on the moment curve
/// `x ↦ (1, x, ..., x^(n-1))` at the given distinct rational points,
/// computed by exact elimination. Distinctness forces full rank n.
pub fn moment_curve_rank(points: &[Rational], n: usize) -> Result<usize, QspanError> {
    if n == 0 || points.is_empty() {
        return Err(QspanError::EmptyInput);
    }
    if points.len() != n {
        return Err(QspanError::Invalid(format!(
            "expected {} points, got {}",
            n,
            points.len()
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i] == points[j] {
                return Err(QspanError::DuplicatePoints);
            }
        }
    }
    let rows: Vec<Vec<Rational>> = points
        .iter()
        .map(|x| {
            let mut row = Vec::with_capacity(n);
            let mut p = Rational::one();
            for _ in 0..n {
                row.push(p.clone());
                p *= x;
            }
            row
        })
        .collect();
    Ok(Matrix::from_rows(rows).expect("rectangular").rank_exact())
}

/// Robust BigRational → f64 conversion. Numerator and denominator are
/// shifted under 600 bits independently, converted, and the exponent is
/// restored with a power of two, so out-of-range values saturate to
/// ±inf / ±0 under ordinary IEEE semantics instead of going NaN.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() || q.denom().is_zero() {
            return v;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let sn = (nb - 600).max(0);
    let sd = (db - 600).max(0);
    let n = q.numer() >> (sn as u64);
    let d = q.denom() >> (sd as u64);
    let r = Rational::new(n, d).to_f64().unwrap_or(f64::NAN);
    let e = (sn - sd).clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    r * 2f64.powi(e)
}

/// `floor(sqrt(n) · 2^bits) / 2^bits`: a one-sided dyadic approximation of
/// √n accurate to 2^(−bits).
pub fn dyadic_sqrt(n: u64, bits: u32) -> Rational {
    let scaled = BigInt::from(n) << (2 * bits as usize);
    Rational::new(scaled.sqrt(), BigInt::one() << (bits as usize))
}

/// Dyadic approximation of log2(n) to `bits` fractional bits, by mantissa
/// squaring in fixed-point arithmetic with 64 guard bits.
pub fn dyadic_log2(n: u64, bits: u32) -> Rational {
    assert!(n >= 1, "log2 requires n >= 1");
    let int_part = 63 - n.leading_zeros() as u64; // floor(log2 n)
    let w = bits as usize + 64;
    // m/2^w represents y = n / 2^int_part ∈ [1, 2).
    let mut m = (BigInt::from(n) << w) >> (int_part as usize);
    let two = BigInt::one() << (w + 1);
    let mut frac = BigInt::zero();
    for _ in 0..bits {
        m = (&m * &m) >> w;
        frac <<= 1;
        if m >= two {
            frac += 1;
            m >>= 1;
        }
    }
    Rational::from(BigInt::from(int_part)) + Rational::new(frac, BigInt::one() << (bits as usize))
}

/// High-precision value for a built-in symbol name, or None if unknown.
pub fn builtin_symbol(name: &str, precision_bits: u32) -> Option<Rational> {
    // Guard bits so downstream scaling at precision_bits stays accurate.
    let bits = precision_bits + 64;
    match name {
        "sqrt2" => Some(dyadic_sqrt(2, bits)),
        "sqrt3" => Some(dyadic_sqrt(3, bits)),
        "sqrt5" => Some(dyadic_sqrt(5, bits)),
        "log2_3" => Some(dyadic_log2(3, bits)),
        _ => None,
    }
}

/// Parses an exact rational from any of the accepted literal forms:
/// `p/q`, `p:q`, a decimal string (`-0.25`, `1.5e2`), or a plain integer.
pub fn parse_rational_literal(s: &str) -> Result<Rational, QspanError> {
    use std::str::FromStr;
    let t = s.trim();
    let bad = |msg: &str| QspanError::Invalid(format!("invalid rational literal '{s}': {msg}"));
    if t.is_empty() {
        return Err(bad("empty"));
    }
    if let Some(pos) = t.find(['/', ':']) {
        let num = BigInt::from_str(t[..pos].trim()).map_err(|_| bad("bad numerator"))?;
        let den = BigInt::from_str(t[pos + 1..].trim()).map_err(|_| bad("bad denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    // Decimal with optional exponent.
    let (mantissa, exp10) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e = i64::from_str(t[pos + 1..].trim()).map_err(|_| bad("bad exponent"))?;
            (&t[..pos], e)
        }
        None => (t, 0i64),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.trim_start_matches(['+', '-']).is_empty() && frac_part.is_empty() {
        return Err(bad("no digits"));
    }
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad("bad fraction digits"));
    }
    let joined = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let digits = BigInt::from_str(&joined).map_err(|_| bad("bad digits"))?;
    let exp = exp10 - frac_part.len() as i64;
    let pow10 = |e: u64| BigInt::from(10u32).pow(u32::try_from(e).unwrap_or(u32::MAX));
    Ok(if exp >= 0 {
        Rational::from(digits * pow10(exp as u64))
    } else {
        Rational::new(digits, pow10((-exp) as u64))
    })
}

impl Serialize for ExactReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        #[serde(untagged)]
        enum SymbolRepr<'a> {
            Builtin(&'a str),
            Decimal { name: &'a str, decimal: &'a str },
            Raw {
                name: &'a str,
                approx: String,
            },
        }
        let symbols: Vec<SymbolRepr> = self
            .basis
            .symbols()
            .iter()
            .map(|sym| match &sym.decimal {
                Some(d) => SymbolRepr::Decimal {
                    name: &sym.name,
                    decimal: d,
                },
                None if sym.name == "1" || BUILTIN_SYMBOLS.contains(&sym.name.as_str()) => {
                    SymbolRepr::Builtin(&sym.name)
                }
                None => SymbolRepr::Raw {
                    name: &sym.name,
                    approx: ser::rational_to_string(&sym.approx),
                },
            })
            .collect();
        let coords: Vec<String> = self.coords.iter().map(ser::rational_to_string).collect();
        let mut st = s.serialize_struct("ExactReal", 3)?;
        st.serialize_field("precision_bits", &self.basis.precision_bits())?;
        st.serialize_field("basis", &symbols)?;
        st.serialize_field("coords", &coords)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ExactReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum SymbolRepr {
            Builtin(String),
            Tagged {
                name: String,
                #[serde(default)]
                decimal: Option<String>,
                #[serde(default)]
                approx: Option<String>,
            },
        }
        #[derive(Deserialize)]
        struct Repr {
            precision_bits: u32,
            basis: Vec<SymbolRepr>,
            coords: Vec<String>,
        }
        let repr = Repr::deserialize(d)?;
        let mut symbols: Vec<(String, Rational, Option<String>)> = Vec::new();
        for sym in repr.basis {
            match sym {
                SymbolRepr::Builtin(name) => {
                    let approx = if name == "1" {
                        Rational::one()
                    } else {
                        builtin_symbol(&name, repr.precision_bits)
                            .ok_or_else(|| D::Error::custom(format!("unknown symbol {name}")))?
                    };
                    symbols.push((name, approx, None));
                }
                SymbolRepr::Tagged {
                    name,
                    decimal,
                    approx,
                } => {
                    let value = match (&decimal, &approx) {
                        (Some(dec), _) => {
                            parse_rational_literal(dec).map_err(D::Error::custom)?
                        }
                        (None, Some(a)) => {
                            ser::rational_from_string(a).map_err(D::Error::custom)?
                        }
                        (None, None) => {
                            return Err(D::Error::custom(format!(
                                "symbol {name} lacks a value"
                            )))
                        }
                    };
                    symbols.push((name, value, decimal));
                }
            }
        }
        let basis = IrrationalBasis::new_with_sources(symbols, repr.precision_bits)
            .map_err(D::Error::custom)?;
        let coords = repr
            .coords
            .iter()
            .map(|c| ser::rational_from_string(c).map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        ExactReal::new(basis, coords).map_err(D::Error::custom)
    }
}

/// Serde helpers: rationals and big integers as decimal strings ("p/q").
pub mod ser {
    use super::Rational;
    use num_bigint::BigInt;
    use num_traits::One;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn rational_to_string(q: &Rational) -> String {
        if q.denom().is_one() {
            q.numer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        }
    }

    pub fn rational_from_string(s: &str) -> Result<Rational, String> {
        Rational::from_str(s).map_err(|e| format!("invalid rational '{s}': {e}"))
    }

    pub mod rational {
        use super::*;
        pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&rational_to_string(q))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
            let s = String::deserialize(d)?;
            rational_from_string(&s).map_err(D::Error::custom)
        }
    }

    pub mod rational_vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(rational_to_string))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let strs = Vec::<String>::deserialize(d)?;
            strs.iter()
                .map(|s| rational_from_string(s).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod int {
        use super::*;
        pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&x.to_string())
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
            let s = String::deserialize(d)?;
            BigInt::from_str(&s).map_err(D::Error::custom)
        }
    }

    pub mod int_vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|x| x.to_string()))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            let strs = Vec::<String>::deserialize(d)?;
            strs.iter()
                .map(|s| BigInt::from_str(s).map_err(D::Error::custom))
                .collect()
        }
    }
}
