//! Heuristic integer-relation detection for numeric inputs.
//!
//! The classical scaled-lattice method: append round(2^p · v_j) to the j-th
//! unit vector (and 2^p to the row for the constant 1), LLL-reduce, and read
//! candidate relations off the short reduced rows. A candidate is accepted
//! when its residual — measured *exactly* against the rationalized inputs —
//! beats 2^(−p/2) and its coefficients respect the height bound. Every
//! answer this module produces is heuristic by construction: "found" is
//! qualified by the measured residual, "none" by the height and precision
//! searched.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, Zero};

use super::lll::{lll_reduce, norm_sq, round_to_int};
use super::{
    normalize_relation, rational_to_f64, Certainty, QspanError, RelationCertificate,
    RelationOutcome,
};
use crate::Rational;

/// Builds the relation lattice for the values (v_1, …, v_k, 1): row j is
/// the j-th unit vector with round(2^p · v_j) appended; the final row
/// carries the constant 1, whose scaled column entry is exactly 2^p.
pub fn relation_rows(values: &[Rational], precision_bits: u32) -> Vec<Vec<BigInt>> {
    let k = values.len();
    let scale = BigInt::one() << precision_bits as usize;
    let scale_q = Rational::from(scale.clone());
    let mut rows = Vec::with_capacity(k + 1);
    for (j, v) in values.iter().enumerate() {
        let mut row = vec![BigInt::zero(); k + 2];
        row[j] = BigInt::one();
        row[k + 1] = round_to_int(&(v * &scale_q));
        rows.push(row);
    }
    let mut last = vec![BigInt::zero(); k + 2];
    last[k] = BigInt::one();
    last[k + 1] = scale;
    rows.push(last);
    rows
}

/// |Σ coeffs_j · v_j + coeffs_k · 1| computed exactly.
fn exact_residual(values: &[Rational], coeffs: &[BigInt]) -> Rational {
    let mut acc = Rational::from(coeffs[values.len()].clone());
    for (c, v) in coeffs.iter().zip(values) {
        acc += Rational::from(c.clone()) * v;
    }
    acc.abs()
}

fn validate_bounds(height_bound: u64, precision_bits: u32) -> Result<(), QspanError> {
    if precision_bits < 64 {
        return Err(QspanError::Invalid("precision_bits must be at least 64".into()));
    }
    if height_bound < 1 {
        return Err(QspanError::Invalid("height_bound must be at least 1".into()));
    }
    Ok(())
}

fn validate(alphas: &[f64], height_bound: u64, precision_bits: u32) -> Result<(), QspanError> {
    if alphas.is_empty() {
        return Err(QspanError::EmptyInput);
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(QspanError::NonFiniteInput);
    }
    validate_bounds(height_bound, precision_bits)
}

fn rationalize(alphas: &[f64]) -> Vec<Rational> {
    alphas
        .iter()
        .map(|&a| Rational::from_f64(a).expect("finite by validation"))
        .collect()
}

fn acceptance_threshold(precision_bits: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << (precision_bits / 2) as usize)
}

fn coeff_height(coeffs: &[BigInt]) -> BigInt {
    coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
}

/// Outcome of judging one reduced row: the labeled relation and its exact
/// residual, if the row passes the residual + height + support gates.
fn judge_row(
    row: &[BigInt],
    values: &[Rational],
    height_bound: u64,
    threshold: &Rational,
) -> Option<(Vec<BigInt>, BigInt, Rational)> {
    let k = values.len();
    let coeffs = &row[..k + 1];
    if coeffs[..k].iter().all(|c| c.is_zero()) {
        return None;
    }
    if coeff_height(coeffs) > BigInt::from(height_bound) {
        return None;
    }
    let residual = exact_residual(values, coeffs);
    if residual >= *threshold {
        return None;
    }
    // Store s with Σ s_j α_j = t, i.e. t is minus the coefficient of 1.
    let mut labeled: Vec<BigInt> = coeffs[..k].to_vec();
    labeled.push(-coeffs[k].clone());
    let labeled = normalize_relation(labeled);
    let (s, t) = (labeled[..k].to_vec(), labeled[k].clone());
    Some((s, t, residual))
}

/// Searches for an integer relation Σ s_j α_j = t among numeric reals by
/// scaled-lattice reduction. Judgement is based on the shortest reduced
/// vector only; see [`numeric_span_membership`] for the all-rows variant.
pub fn detect_relation_numeric(
    alphas: &[f64],
    height_bound: u64,
    precision_bits: u32,
) -> Result<RelationCertificate, QspanError> {
    validate(alphas, height_bound, precision_bits)?;
    detect_relation_rational(&rationalize(alphas), height_bound, precision_bits)
}

/// [`detect_relation_numeric`] on arbitrary-precision rational
/// approximations. The meaningful regime is input accuracy at or beyond
/// `precision_bits`: the residual gate sits at 2^(−precision_bits/2), so
/// values carried only to f64 accuracy should go through the f64 entry
/// point with a matching (smaller) precision instead.
pub fn detect_relation_rational(
    values: &[Rational],
    height_bound: u64,
    precision_bits: u32,
) -> Result<RelationCertificate, QspanError> {
    if values.is_empty() {
        return Err(QspanError::EmptyInput);
    }
    validate_bounds(height_bound, precision_bits)?;
    let rows = relation_rows(values, precision_bits);
    let delta = Rational::new(BigInt::from(3), BigInt::from(4));
    let reduced = lll_reduce(&rows, &delta)?;
    let shortest = reduced
        .iter()
        .min_by(|a, b| norm_sq(a).cmp(&norm_sq(b)))
        .expect("reduced basis nonempty");
    let threshold = acceptance_threshold(precision_bits);
    let outcome = match judge_row(shortest, values, height_bound, &threshold) {
        Some((s, t, residual)) => RelationOutcome::Found {
            s,
            t,
            residual: rational_to_f64(&residual),
        },
        None => RelationOutcome::NoneUpToHeight,
    };
    Ok(RelationCertificate {
        outcome,
        certainty: Certainty::Heuristic,
        height_bound: Some(height_bound),
        precision_bits: Some(precision_bits),
    })
}

/// Heuristic test for α_j ∈ span_Q({1} ∪ {α_i : i ≠ j}) on numeric inputs.
///
/// Reduces the same relation lattice and scans **all** reduced rows (a
/// relation witnessing j's membership need not be the shortest vector);
/// accepts a row under the same residual/height gates, requiring a nonzero
/// coefficient at position j. Returns the witnessing certificate.
pub fn numeric_span_membership(
    alphas: &[f64],
    j: usize,
    height_bound: u64,
    precision_bits: u32,
) -> Result<Option<RelationCertificate>, QspanError> {
    validate(alphas, height_bound, precision_bits)?;
    if j >= alphas.len() {
        return Err(QspanError::Invalid(format!(
            "index {} out of range for {} values",
            j,
            alphas.len()
        )));
    }
    let values = rationalize(alphas);
    let rows = relation_rows(&values, precision_bits);
    let delta = Rational::new(BigInt::from(3), BigInt::from(4));
    let reduced = lll_reduce(&rows, &delta)?;
    let threshold = acceptance_threshold(precision_bits);
    let mut best: Option<(BigInt, Vec<BigInt>, BigInt, Rational)> = None;
    for row in &reduced {
        if row[j].is_zero() {
            continue;
        }
        if let Some((s, t, residual)) = judge_row(row, &values, height_bound, &threshold) {
            let n = norm_sq(row);
            if best.as_ref().is_none_or(|(bn, ..)| n < *bn) {
                best = Some((n, s, t, residual));
            }
        }
    }
    Ok(best.map(|(_, s, t, residual)| RelationCertificate {
        outcome: RelationOutcome::Found {
            s,
            t,
            residual: rational_to_f64(&residual),
        },
        certainty: Certainty::Heuristic,
        height_bound: Some(height_bound),
        precision_bits: Some(precision_bits),
    }))
}
