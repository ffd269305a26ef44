//! Real Jordan structure of a real square matrix.
//!
//! Every real matrix is similar to a direct sum of *splitting* Jordan
//! blocks J_m(λ) (real eigenvalue λ) and *rotation* blocks r·J_m(R_θ),
//! where R_θ is the 2×2 rotation and the block is the m×m Jordan matrix
//! over it (dimension 2m). This module recovers that data from either an
//! exact rational matrix or a floating-point matrix, or builds it directly
//! from a user block specification.
//!
//! Angles are stored as *turns* α = θ/2π, normalized into the open
//! interval (0, 1/2): a rotation block and its conjugate are one real
//! block, and θ ∈ {0, π} is not a rotation at all but a pair of real
//! eigenvalues ±r, which must be represented as splitting blocks.
//!
//! Exactness is tracked per datum: a rational input matrix yields exact
//! block sizes and kinds always (ranks are computed over Q or over
//! Q[x]/(f) by dynamic evaluation), while eigenvalue *values* stay exact
//! only when they are rational or belong to a reconstructed conjugate
//! pair with rational trace and norm. Rotation angles are exact when the
//! pair's cosine lands in the classical rational-cosine table, and are
//! otherwise numeric — but certified irrational, which several verdicts
//! can still use exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};
use crate::qspan::{rational_to_f64, ExactReal, QspanError};
use crate::{MatF, Rational};

mod extension;
mod extract;
mod qpoly;
mod roots;

pub use extension::nullity_sequence_at_root;
pub use extract::{extract_structure, extract_structure_exact, extract_structure_f64, MatrixInput};
pub use qpoly::{char_poly, QPoly};
pub use roots::{poly_roots, RootApprox};

#[derive(Debug, Error)]
pub enum JordanError {
    #[error("matrix error: {0}")]
    Matrix(#[from] MatrixError),
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("dimension {dim} exceeds the extraction bound {bound}")]
    TooLarge { dim: usize, bound: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("structure extraction failed at tol {tol}: {detail} (rank profile {profile:?})")]
    ExtractionFailed {
        tol: f64,
        detail: String,
        profile: Vec<usize>,
    },
    #[error("exact input required")]
    ExactInputRequired,
    #[error("invalid block specification: {0}")]
    BadBlockSpec(String),
    #[error("{0}")]
    Invalid(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Qspan(#[from] QspanError),
}

/// A real number known either exactly (rational) or numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealValue {
    Exact(#[serde(with = "crate::qspan::ser::rational")] Rational),
    Approx(f64),
}

impl RealValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            RealValue::Exact(q) => rational_to_f64(q),
            RealValue::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, RealValue::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            RealValue::Exact(q) => Some(q),
            RealValue::Approx(_) => None,
        }
    }
}

/// A rotation angle in turns (θ/2π), normalized into (0, 1/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleTurns {
    /// Exact element of a declared Q-span (possibly rational).
    Exact(ExactReal),
    /// Numeric value; `irrational_certified` means exact analysis proved
    /// the true angle is an irrational number of turns even though its
    /// value is only known numerically.
    Numeric { turns: f64, irrational_certified: bool },
}

impl AngleTurns {
    pub fn to_f64(&self) -> f64 {
        match self {
            AngleTurns::Exact(er) => er.to_f64(),
            AngleTurns::Numeric { turns, .. } => *turns,
        }
    }

    pub fn as_exact(&self) -> Option<&ExactReal> {
        match self {
            AngleTurns::Exact(er) => Some(er),
            AngleTurns::Numeric { .. } => None,
        }
    }

    /// Some(p/q) iff the angle is exactly a rational number of turns.
    pub fn as_exact_rational(&self) -> Option<Rational> {
        self.as_exact().and_then(|er| er.as_rational())
    }

    /// True when the angle is *known* to be an irrational number of turns
    /// (exactly represented irrational, or certified during extraction).
    pub fn known_irrational(&self) -> bool {
        match self {
            AngleTurns::Exact(er) => er.as_rational().is_none(),
            AngleTurns::Numeric {
                irrational_certified,
                ..
            } => *irrational_certified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Split {
        value: RealValue,
    },
    Rotation {
        /// Squared radius: exact whenever the conjugate pair has rational
        /// norm (comparisons happen on squares to stay exact).
        radius_sq: RealValue,
        angle: AngleTurns,
    },
}

/// One real Jordan block: J_size(λ) or r·J_size(R_θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub size: usize,
    pub kind: BlockKind,
}

impl JordanBlock {
    /// Dimension contributed to the ambient space (rotations count 2m).
    pub fn dim(&self) -> usize {
        match self.kind {
            BlockKind::Split { .. } => self.size,
            BlockKind::Rotation { .. } => 2 * self.size,
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self.kind, BlockKind::Split { .. })
    }

    /// |eigenvalue| (split) or radius (rotation) as f64.
    pub fn radius_f64(&self) -> f64 {
        match &self.kind {
            BlockKind::Split { value } => value.to_f64().abs(),
            BlockKind::Rotation { radius_sq, .. } => radius_sq.to_f64().max(0.0).sqrt(),
        }
    }

    /// Squared radius, exact when the underlying datum is exact.
    pub fn radius_sq(&self) -> RealValue {
        match &self.kind {
            BlockKind::Split { value } => match value {
                RealValue::Exact(q) => RealValue::Exact(q * q),
                RealValue::Approx(x) => RealValue::Approx(x * x),
            },
            BlockKind::Rotation { radius_sq, .. } => radius_sq.clone(),
        }
    }
}

/// Whether the structure came from exact or tolerance-based extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureSource {
    Exact,
    Numeric { tol: f64 },
}

/// The real Jordan data of a matrix, similarity-invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanStructure {
    pub blocks: Vec<JordanBlock>,
    /// Ambient dimension: Σ block dims (rotations counted twice).
    pub dimension: usize,
    /// max |eigenvalue| over all blocks, as f64 (exact comparisons happen
    /// on the per-block squared radii).
    pub spectral_radius: f64,
    pub source: StructureSource,
}

impl JordanStructure {
    /// Validates block invariants, sorts blocks canonically and fills in
    /// the derived fields.
    pub fn new(mut blocks: Vec<JordanBlock>, source: StructureSource) -> Result<Self, JordanError> {
        if blocks.is_empty() {
            return Err(JordanError::EmptyMatrix);
        }
        for b in &blocks {
            validate_block(b)?;
        }
        blocks.sort_by(|a, b| {
            b.radius_f64()
                .total_cmp(&a.radius_f64())
                .then_with(|| a.is_split().cmp(&b.is_split()))
                .then_with(|| b.size.cmp(&a.size))
                .then_with(|| sort_value(a).total_cmp(&sort_value(b)))
        });
        let dimension = blocks.iter().map(|b| b.dim()).sum();
        let spectral_radius = blocks
            .iter()
            .map(|b| b.radius_f64())
            .fold(0.0f64, f64::max);
        Ok(JordanStructure {
            blocks,
            dimension,
            spectral_radius,
            source,
        })
    }

    pub fn is_exact_source(&self) -> bool {
        matches!(self.source, StructureSource::Exact)
    }
}

fn sort_value(b: &JordanBlock) -> f64 {
    match &b.kind {
        BlockKind::Split { value } => value.to_f64(),
        BlockKind::Rotation { angle, .. } => angle.to_f64(),
    }
}

fn validate_block(b: &JordanBlock) -> Result<(), JordanError> {
    if b.size == 0 {
        return Err(JordanError::BadBlockSpec("block size must be >= 1".into()));
    }
    match &b.kind {
        BlockKind::Split { value } => {
            if !value.to_f64().is_finite() {
                return Err(JordanError::BadBlockSpec("eigenvalue must be finite".into()));
            }
        }
        BlockKind::Rotation { radius_sq, angle } => {
            match radius_sq {
                RealValue::Exact(q) => {
                    if !q.is_positive() {
                        return Err(JordanError::BadBlockSpec(
                            "rotation radius must be positive".into(),
                        ));
                    }
                }
                RealValue::Approx(x) => {
                    if !(x.is_finite() && *x > 0.0) {
                        return Err(JordanError::BadBlockSpec(
                            "rotation radius must be positive and finite".into(),
                        ));
                    }
                }
            }
            let splitting = JordanError::BadBlockSpec(
                "angle 0 or 1/2 turn is a splitting case; use split blocks ±r".into(),
            );
            match angle {
                AngleTurns::Exact(er) => {
                    if let Some(q) = er.as_rational() {
                        let half = Rational::new(BigInt::one(), BigInt::from(2));
                        if q.is_zero() || q == half {
                            return Err(splitting);
                        }
                        if !q.is_positive() || q > half {
                            return Err(JordanError::BadBlockSpec(
                                "angle turns must lie in (0, 1/2)".into(),
                            ));
                        }
                    } else {
                        let v = er.approx();
                        if !v.is_positive() || v >= Rational::new(BigInt::one(), BigInt::from(2))
                        {
                            return Err(JordanError::BadBlockSpec(
                                "angle turns must lie in (0, 1/2)".into(),
                            ));
                        }
                    }
                }
                AngleTurns::Numeric { turns, .. } => {
                    if !(turns.is_finite() && *turns > 0.0 && *turns < 0.5) {
                        return Err(JordanError::BadBlockSpec(
                            "angle turns must lie in (0, 1/2)".into(),
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// User-supplied direct-sum description (the exact input tier that
/// bypasses extraction).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpecEntry {
    pub size: usize,
    pub kind: BlockSpecKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockSpecKind {
    Split { value: Rational },
    Rotation { radius: Rational, angle_turns: ExactReal },
}

/// Builds an exact structure from a block spec, normalizing each rotation
/// angle into (0, 1/2) (mod 1, then folding α ↦ 1 − α: the conjugate
/// representative names the same real block).
pub fn structure_from_spec(entries: &[BlockSpecEntry]) -> Result<JordanStructure, JordanError> {
    if entries.is_empty() {
        return Err(JordanError::BadBlockSpec("no blocks given".into()));
    }
    let mut blocks = Vec::with_capacity(entries.len());
    for e in entries {
        let kind = match &e.kind {
            BlockSpecKind::Split { value } => BlockKind::Split {
                value: RealValue::Exact(value.clone()),
            },
            BlockSpecKind::Rotation {
                radius,
                angle_turns,
            } => {
                if !radius.is_positive() {
                    return Err(JordanError::BadBlockSpec(
                        "rotation radius must be positive".into(),
                    ));
                }
                let angle = normalize_turns(angle_turns)?;
                BlockKind::Rotation {
                    radius_sq: RealValue::Exact(radius * radius),
                    angle: AngleTurns::Exact(angle),
                }
            }
        };
        blocks.push(JordanBlock { size: e.size, kind });
    }
    JordanStructure::new(blocks, StructureSource::Exact)
}

/// Reduces an exact angle mod 1 and folds (1/2, 1) into (0, 1/2). Exactly
/// 0 and exactly 1/2 are rejected: those are splitting eigenvalues.
pub fn normalize_turns(angle: &ExactReal) -> Result<ExactReal, JordanError> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut a = angle.mod_one();
    if let Some(q) = a.as_rational() {
        if q.is_zero() || q == half {
            return Err(JordanError::BadBlockSpec(
                "angle 0 or 1/2 turn is a splitting case; use split blocks ±r".into(),
            ));
        }
    }
    if a.approx() > half {
        let one = ExactReal::from_rational(a.basis().clone(), Rational::one());
        a = one.sub(&a)?;
    }
    Ok(a)
}

/// Concrete f64 matrix realizing the structure: standard real Jordan form
/// with r·R_θ (or λ) on the diagonal and identity blocks (or 1) above.
pub fn realize_f64(structure: &JordanStructure) -> MatF {
    let mut blocks: Vec<MatF> = Vec::with_capacity(structure.blocks.len());
    for b in &structure.blocks {
        match &b.kind {
            BlockKind::Split { value } => {
                let lam = value.to_f64();
                let mut m = Matrix::zeros(b.size, b.size);
                for i in 0..b.size {
                    m.set(i, i, lam);
                    if i + 1 < b.size {
                        m.set(i, i + 1, 1.0);
                    }
                }
                blocks.push(m);
            }
            BlockKind::Rotation { radius_sq, angle } => {
                let r = radius_sq.to_f64().max(0.0).sqrt();
                let theta = 2.0 * std::f64::consts::PI * angle.to_f64();
                let (c, s) = (theta.cos(), theta.sin());
                let n = 2 * b.size;
                let mut m = Matrix::zeros(n, n);
                for i in 0..b.size {
                    m.set(2 * i, 2 * i, r * c);
                    m.set(2 * i, 2 * i + 1, -r * s);
                    m.set(2 * i + 1, 2 * i, r * s);
                    m.set(2 * i + 1, 2 * i + 1, r * c);
                    if i + 1 < b.size {
                        m.set(2 * i, 2 * i + 2, 1.0);
                        m.set(2 * i + 1, 2 * i + 3, 1.0);
                    }
                }
                blocks.push(m);
            }
        }
    }
    Matrix::block_diag(&blocks)
}

/// Finiteness of the power orbit {T^n}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitFiniteness {
    /// T^order = I (order minimal for the block data).
    PowerIdentity { order: u64 },
    /// T^index = 0 (index = largest nilpotent block).
    Nilpotent { index: usize },
    Infinite,
}

/// Decides whether the orbit {T^n : n ≥ 0} is finite. Requires an
/// exact-source structure; values that extraction left numeric are known
/// irrational, which decides their cases exactly (irrational ≠ 0, ±1, and
/// an irrational number of turns has infinite rotation order).
pub fn orbit_finiteness(structure: &JordanStructure) -> Result<OrbitFiniteness, JordanError> {
    if !structure.is_exact_source() {
        return Err(JordanError::ExactInputRequired);
    }
    let nilpotent = structure.blocks.iter().all(|b| match &b.kind {
        BlockKind::Split { value } => matches!(value, RealValue::Exact(q) if q.is_zero()),
        BlockKind::Rotation { .. } => false,
    });
    if nilpotent {
        let index = structure.blocks.iter().map(|b| b.size).max().unwrap_or(1);
        return Ok(OrbitFiniteness::Nilpotent { index });
    }
    let mut order = BigInt::one();
    for b in &structure.blocks {
        if b.size != 1 {
            return Ok(OrbitFiniteness::Infinite);
        }
        match &b.kind {
            BlockKind::Split { value } => match value.as_exact() {
                Some(q) if q.is_one() => {}
                Some(q) if (-q).is_one() => order = order.lcm(&BigInt::from(2)),
                // Exact non-unit or irrational-by-construction value.
                _ => return Ok(OrbitFiniteness::Infinite),
            },
            BlockKind::Rotation { radius_sq, angle } => {
                if !matches!(radius_sq, RealValue::Exact(q) if q.is_one()) {
                    return Ok(OrbitFiniteness::Infinite);
                }
                match angle.as_exact_rational() {
                    Some(q) => order = order.lcm(q.denom()),
                    None => return Ok(OrbitFiniteness::Infinite),
                }
            }
        }
    }
    let order = order
        .to_u64()
        .ok_or_else(|| JordanError::Invalid("finite order exceeds u64".into()))?;
    Ok(OrbitFiniteness::PowerIdentity { order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspan::IrrationalBasis;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn rational_turns(n: i64, d: i64) -> ExactReal {
        ExactReal::from_rational(IrrationalBasis::rational(), q(n, d))
    }

    fn rotation_spec(size: usize, radius: Rational, turns: ExactReal) -> BlockSpecEntry {
        BlockSpecEntry {
            size,
            kind: BlockSpecKind::Rotation {
                radius,
                angle_turns: turns,
            },
        }
    }

    fn split_spec(size: usize, value: Rational) -> BlockSpecEntry {
        BlockSpecEntry {
            size,
            kind: BlockSpecKind::Split { value },
        }
    }

    #[test]
    fn spec_normalizes_angles_into_half_open_interval() {
        // 0.9 turns folds to 0.1 turns.
        let s = structure_from_spec(&[rotation_spec(1, q(1, 1), rational_turns(9, 10))]).unwrap();
        match &s.blocks[0].kind {
            BlockKind::Rotation { angle, .. } => {
                assert_eq!(angle.as_exact_rational().unwrap(), q(1, 10));
            }
            _ => panic!("expected rotation"),
        }
        // Exactly half a turn is rejected.
        let err = structure_from_spec(&[rotation_spec(1, q(1, 1), rational_turns(1, 2))]);
        assert!(matches!(err, Err(JordanError::BadBlockSpec(_))));
        // Whole turns are rejected too.
        let err = structure_from_spec(&[rotation_spec(1, q(1, 1), rational_turns(3, 1))]);
        assert!(matches!(err, Err(JordanError::BadBlockSpec(_))));
    }

    #[test]
    fn sqrt2_angle_normalizes_by_mod_one() {
        let b = IrrationalBasis::with_builtins(&["sqrt2"], 128).unwrap();
        let sqrt2 = ExactReal::symbol(b, "sqrt2").unwrap();
        let s = structure_from_spec(&[rotation_spec(1, q(1, 1), sqrt2)]).unwrap();
        match &s.blocks[0].kind {
            BlockKind::Rotation { angle, .. } => {
                let v = angle.to_f64();
                assert!((v - (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-12);
                assert!(angle.known_irrational());
            }
            _ => panic!("expected rotation"),
        }
    }

    #[test]
    fn dimension_and_spectral_radius() {
        let s = structure_from_spec(&[
            split_spec(2, q(1, 2)),
            rotation_spec(2, q(3, 1), rational_turns(1, 4)),
        ])
        .unwrap();
        assert_eq!(s.dimension, 6);
        assert!((s.spectral_radius - 3.0).abs() < 1e-15);
        // Canonical order puts the larger radius first.
        assert!(!s.blocks[0].is_split());
    }

    #[test]
    fn finiteness_power_identity() {
        // R_{1/4 turn} → T^4 = I.
        let s = structure_from_spec(&[rotation_spec(1, q(1, 1), rational_turns(1, 4))]).unwrap();
        assert_eq!(
            orbit_finiteness(&s).unwrap(),
            OrbitFiniteness::PowerIdentity { order: 4 }
        );
        // Adding a −1 eigenvalue keeps order 4 (lcm(4,2)).
        let s2 = structure_from_spec(&[
            rotation_spec(1, q(1, 1), rational_turns(1, 4)),
            split_spec(1, q(-1, 1)),
        ])
        .unwrap();
        assert_eq!(
            orbit_finiteness(&s2).unwrap(),
            OrbitFiniteness::PowerIdentity { order: 4 }
        );
        // R_{1/3} ⊕ (−1) → lcm(3,2) = 6.
        let s3 = structure_from_spec(&[
            rotation_spec(1, q(1, 1), rational_turns(1, 3)),
            split_spec(1, q(-1, 1)),
        ])
        .unwrap();
        assert_eq!(
            orbit_finiteness(&s3).unwrap(),
            OrbitFiniteness::PowerIdentity { order: 6 }
        );
    }

    #[test]
    fn finiteness_nilpotent_and_infinite() {
        let s = structure_from_spec(&[split_spec(2, q(0, 1))]).unwrap();
        assert_eq!(
            orbit_finiteness(&s).unwrap(),
            OrbitFiniteness::Nilpotent { index: 2 }
        );
        let s2 = structure_from_spec(&[split_spec(1, q(2, 1)), split_spec(1, q(1, 1))]).unwrap();
        assert_eq!(orbit_finiteness(&s2).unwrap(), OrbitFiniteness::Infinite);
        // Irrational angle at radius 1 → infinite orbit.
        let b = IrrationalBasis::with_builtins(&["sqrt2"], 128).unwrap();
        let sqrt2 = ExactReal::symbol(b, "sqrt2").unwrap();
        let s3 = structure_from_spec(&[rotation_spec(1, q(1, 1), sqrt2)]).unwrap();
        assert_eq!(orbit_finiteness(&s3).unwrap(), OrbitFiniteness::Infinite);
    }

    #[test]
    fn finiteness_requires_exact_source() {
        let s = JordanStructure::new(
            vec![JordanBlock {
                size: 1,
                kind: BlockKind::Split {
                    value: RealValue::Approx(1.0),
                },
            }],
            StructureSource::Numeric { tol: 1e-8 },
        )
        .unwrap();
        assert!(matches!(
            orbit_finiteness(&s),
            Err(JordanError::ExactInputRequired)
        ));
    }

    #[test]
    fn realize_rotation_block_shape() {
        let s = structure_from_spec(&[rotation_spec(2, q(1, 1), rational_turns(1, 4))]).unwrap();
        let t = realize_f64(&s);
        assert_eq!(t.rows(), 4);
        // Diagonal 2×2 blocks are R_{π/2}; superdiagonal block is I₂.
        assert!((t.at(0, 1) + 1.0).abs() < 1e-15);
        assert!((t.at(1, 0) - 1.0).abs() < 1e-15);
        assert!((t.at(0, 2) - 1.0).abs() < 1e-15);
        assert!((t.at(1, 3) - 1.0).abs() < 1e-15);
        assert!(t.at(0, 0).abs() < 1e-15);
    }

    #[test]
    fn structure_serde_round_trip() {
        let b = IrrationalBasis::with_builtins(&["sqrt2"], 128).unwrap();
        let sqrt2 = ExactReal::symbol(b, "sqrt2").unwrap();
        let s = structure_from_spec(&[
            rotation_spec(1, q(1, 1), sqrt2),
            split_spec(2, q(-1, 2)),
        ])
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: JordanStructure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
