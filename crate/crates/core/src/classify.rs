//! Deciding orbit reflexivity and ℝ-orbit reflexivity of a real matrix
//! from its real Jordan structure.
//!
//! Write Orb(T) = {T^n : n ≥ 0} and ℝ·Orb(T) = {λT^n : λ ∈ ℝ, n ≥ 0}. An
//! operator S belongs to the *orbit-reflexive closure* of T when Sx lies
//! in the closure of Orb(T)x for every vector x (and similarly with
//! scalars for the ℝ-orbit version); T is orbit reflexive (ℝ-orbit
//! reflexive) when that pointwise closure adds nothing beyond the strong
//! closure of the orbit itself.
//!
//! Both properties are decided by the block data alone:
//!
//! *Orbit reflexivity.* If r(T) ≠ 1, or some Jordan block of size ≥ 2
//! sits at spectral radius 1, T is orbit reflexive. Otherwise T is (up to
//! similarity) R_{θ_1} ⊕ … ⊕ R_{θ_k} ⊕ B ⊕ C with B² = I and r(C) < 1
//! — the *flat form* — and T fails to be orbit reflexive precisely when
//! some angle α_j = θ_j/2π lies outside span_ℚ({1} ∪ {α_i : i ≠ j}).
//! Equivalently (and this is how the no-case is witnessed) there is no
//! integer relation Σ s_jα_j = t with every s_j ≠ 0.
//!
//! *ℝ-orbit reflexivity.* Nilpotent T is ℝ-orbit reflexive. Otherwise
//! normalize by r(T) and let m be the largest block size at the spectral
//! radius. If every block there splits, T fails exactly when the two
//! largest such blocks differ in size by more than 1 (a missing second
//! block counts as size 0). Otherwise only the non-splitting size-m
//! blocks enter: with angles α_1..α_k, T fails exactly when some α_j
//! lies outside span_ℚ({1} ∪ {α_i : i ≠ j}).
//!
//! Membership tests run on the exact engine whenever every angle is an
//! `ExactReal` over a compatible declared basis, and otherwise fall back
//! to lattice-reduction detection, which taints the verdict `heuristic`
//! with the search bounds recorded in the evidence.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::jordan::{AngleTurns, BlockKind, JordanError, JordanStructure, RealValue};
use crate::qspan::{
    normalize_relation, numeric_span_membership, primitive_integer_vector, span_membership,
    Certainty, ExactReal, QspanError, RelationCertificate, RelationOutcome, SpanCoefficients,
};
use crate::Rational;
use num_traits::{One, Zero};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error(transparent)]
    Qspan(#[from] QspanError),
    #[error("not in flat form: {0}")]
    NotLemmaForm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    OrbitReflexive,
    ROrbitReflexive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn as_bool(self) -> bool {
        matches!(self, Answer::Yes)
    }
}

/// One span-membership decision: is angle `index` in the ℚ-span of 1 and
/// the other angles of the family?
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipRecord {
    pub index: usize,
    pub member: bool,
    pub certainty: Certainty,
    /// The witnessing relation for members, or the strongest no-relation
    /// statement available for non-members.
    pub relation: RelationCertificate,
}

/// Auditable data behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Evidence {
    pub spectral_radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_size_at_radius: Option<usize>,
    /// Angle family consulted (turns, numeric readout).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub angles_turns: Vec<f64>,
    /// Two largest splitting block sizes at the spectral radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_sizes: Option<(usize, usize)>,
    /// Index of an angle found outside the span of the others (no-verdicts).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub independent_angle: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub memberships: Vec<MembershipRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: Property,
    pub answer: Answer,
    /// Identifier of the clause that fired: "r<1", "r>1",
    /// "big-block-at-radius", "lemma-hard-relation", "finite-orbit",
    /// "nilpotent", "split-gap", "no-max-size-non-split",
    /// "non-split-independent-angle".
    pub rule: String,
    pub evidence: Evidence,
    pub certainty: Certainty,
}

/// The flat form R_{θ_1} ⊕ … ⊕ R_{θ_k} ⊕ B ⊕ C (B² = I, r(C) < 1) that
/// the orbit-reflexivity dichotomy reduces to when r(T) = 1 and all
/// blocks at radius 1 have size 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaHardForm {
    pub angles: Vec<AngleTurns>,
    pub has_b: bool,
    pub has_c: bool,
}

/// Partitions a structure into the flat form; errors when r(T) ≠ 1 or a
/// block of size ≥ 2 sits at the spectral radius.
pub fn to_lemma_hard_form(s: &JordanStructure) -> Result<LemmaHardForm, ClassifyError> {
    let (pos, _) = spectral_position(s);
    if pos != Ordering::Equal {
        return Err(ClassifyError::NotLemmaForm(
            "spectral radius is not 1".into(),
        ));
    }
    let group = blocks_at_spectral_radius(s);
    let mut angles = Vec::new();
    let mut has_b = false;
    let mut has_c = false;
    for (i, b) in s.blocks.iter().enumerate() {
        if group.indices.contains(&i) {
            if b.size != 1 {
                return Err(ClassifyError::NotLemmaForm(format!(
                    "size-{} block at the spectral radius",
                    b.size
                )));
            }
            match &b.kind {
                BlockKind::Rotation { angle, .. } => angles.push(angle.clone()),
                BlockKind::Split { .. } => has_b = true,
            }
        } else {
            has_c = true;
        }
    }
    Ok(LemmaHardForm {
        angles,
        has_b,
        has_c,
    })
}

/// Decides orbit reflexivity.
pub fn classify_orbit_reflexive(
    s: &JordanStructure,
    cfg: &Config,
) -> Result<Verdict, ClassifyError> {
    let mut ev = Evidence {
        spectral_radius: s.spectral_radius,
        ..Default::default()
    };
    let (pos, pos_exact) = spectral_position(s);
    match pos {
        Ordering::Less => {
            return Ok(verdict(
                Property::OrbitReflexive,
                Answer::Yes,
                "r<1",
                ev,
                pos_exact,
            ))
        }
        Ordering::Greater => {
            return Ok(verdict(
                Property::OrbitReflexive,
                Answer::Yes,
                "r>1",
                ev,
                pos_exact,
            ))
        }
        Ordering::Equal => {}
    }
    let group = blocks_at_spectral_radius(s);
    let m = group
        .indices
        .iter()
        .map(|&i| s.blocks[i].size)
        .max()
        .unwrap_or(0);
    ev.max_size_at_radius = Some(m);
    let base_exact = pos_exact && group.exact;
    if m >= 2 {
        // A big block at radius 1 forces ‖T^n x‖ → ∞ off a proper
        // subspace, which pins the pointwise closure to the orbit.
        return Ok(verdict(
            Property::OrbitReflexive,
            Answer::Yes,
            "big-block-at-radius",
            ev,
            base_exact,
        ));
    }
    let form = to_lemma_hard_form(s)?;
    ev.angles_turns = form.angles.iter().map(|a| a.to_f64()).collect();
    if form.angles.is_empty() {
        // Radius-1 part is B with B² = I: its orbit is finite, and the
        // strictly contracting rest cannot break reflexivity.
        return Ok(verdict(
            Property::OrbitReflexive,
            Answer::Yes,
            "finite-orbit",
            ev,
            base_exact,
        ));
    }
    if form
        .angles
        .iter()
        .all(|a| a.as_exact_rational().is_some())
    {
        // All rotations have finite order: the radius-1 part satisfies
        // T_1^N = I, and membership condition (every angle in the span of
        // the others and 1) holds trivially.
        return Ok(verdict(
            Property::OrbitReflexive,
            Answer::Yes,
            "finite-orbit",
            ev,
            base_exact,
        ));
    }
    let decision = decide_angle_family(&form.angles, cfg)?;
    ev.memberships = decision.records;
    ev.independent_angle = decision.failed;
    let exact = base_exact && decision.exact;
    match decision.failed {
        None => Ok(verdict(
            Property::OrbitReflexive,
            Answer::Yes,
            "lemma-hard-relation",
            ev,
            exact,
        )),
        Some(_) => Ok(verdict(
            Property::OrbitReflexive,
            Answer::No,
            "lemma-hard-relation",
            ev,
            exact,
        )),
    }
}

/// Decides ℝ-orbit reflexivity.
pub fn classify_r_orbit_reflexive(
    s: &JordanStructure,
    cfg: &Config,
) -> Result<Verdict, ClassifyError> {
    let mut ev = Evidence {
        spectral_radius: s.spectral_radius,
        ..Default::default()
    };
    if s.spectral_radius == 0.0 {
        let exact = s.blocks.iter().all(|b| match &b.kind {
            BlockKind::Split { value } => value.is_exact(),
            BlockKind::Rotation { .. } => false,
        });
        return Ok(verdict(
            Property::ROrbitReflexive,
            Answer::Yes,
            "nilpotent",
            ev,
            exact,
        ));
    }
    // Everything below is invariant under T ↦ T/r(T): only the blocks at
    // the spectral radius, their sizes, kinds, and angles enter.
    let group = blocks_at_spectral_radius(s);
    let at_radius: Vec<usize> = group.indices.clone();
    let m = at_radius
        .iter()
        .map(|&i| s.blocks[i].size)
        .max()
        .unwrap_or(0);
    ev.max_size_at_radius = Some(m);
    let all_split = at_radius.iter().all(|&i| s.blocks[i].is_split());
    if all_split {
        let mut sizes: Vec<usize> = at_radius.iter().map(|&i| s.blocks[i].size).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let first = sizes[0];
        let second = sizes.get(1).copied().unwrap_or(0);
        ev.split_sizes = Some((first, second));
        let answer = if first - second > 1 {
            Answer::No
        } else {
            Answer::Yes
        };
        return Ok(verdict(
            Property::ROrbitReflexive,
            answer,
            "split-gap",
            ev,
            group.exact,
        ));
    }
    // Only the non-splitting blocks of the maximal size m enter the
    // angle criterion; smaller or splitting blocks at the radius ride
    // along (their scaled powers converge on their own).
    let family: Vec<&AngleTurns> = at_radius
        .iter()
        .filter_map(|&i| {
            let b = &s.blocks[i];
            if b.size != m {
                return None;
            }
            match &b.kind {
                BlockKind::Rotation { angle, .. } => Some(angle),
                BlockKind::Split { .. } => None,
            }
        })
        .collect();
    if family.is_empty() {
        return Ok(verdict(
            Property::ROrbitReflexive,
            Answer::Yes,
            "no-max-size-non-split",
            ev,
            group.exact,
        ));
    }
    let angles: Vec<AngleTurns> = family.into_iter().cloned().collect();
    ev.angles_turns = angles.iter().map(|a| a.to_f64()).collect();
    let decision = decide_angle_family(&angles, cfg)?;
    ev.memberships = decision.records;
    ev.independent_angle = decision.failed;
    let exact = group.exact && decision.exact;
    let answer = if decision.failed.is_some() {
        Answer::No
    } else {
        Answer::Yes
    };
    Ok(verdict(
        Property::ROrbitReflexive,
        answer,
        "non-split-independent-angle",
        ev,
        exact,
    ))
}

fn verdict(
    property: Property,
    answer: Answer,
    rule: &str,
    evidence: Evidence,
    exact: bool,
) -> Verdict {
    Verdict {
        property,
        answer,
        rule: rule.to_string(),
        evidence,
        certainty: if exact {
            Certainty::Exact
        } else {
            Certainty::Heuristic
        },
    }
}

/// Squared block radius against 1, with an exactness bit.
fn cmp_radius_sq_one(v: &RealValue) -> (Ordering, bool) {
    match v {
        RealValue::Exact(q) => (q.cmp(&Rational::one()), true),
        RealValue::Approx(x) => (x.partial_cmp(&1.0).unwrap_or(Ordering::Equal), false),
    }
}

/// r(T) compared against 1. The comparison is exact when the deciding
/// data is: one exactly-above block settles Greater regardless of the
/// rest, while Equal and Less need every block exact.
fn spectral_position(s: &JordanStructure) -> (Ordering, bool) {
    let mut overall = Ordering::Less;
    let mut any_above_exact = false;
    let mut equal_exact = false;
    let mut all_exact = true;
    for b in &s.blocks {
        let (pos, exact) = cmp_radius_sq_one(&b.radius_sq());
        all_exact &= exact;
        match pos {
            Ordering::Greater => {
                overall = Ordering::Greater;
                any_above_exact |= exact;
            }
            Ordering::Equal => {
                if overall != Ordering::Greater {
                    overall = Ordering::Equal;
                }
                equal_exact |= exact;
            }
            Ordering::Less => {}
        }
    }
    let exact = match overall {
        Ordering::Greater => any_above_exact,
        Ordering::Equal => equal_exact && all_exact,
        Ordering::Less => all_exact,
    };
    (overall, exact)
}

struct RadiusGroup {
    indices: Vec<usize>,
    exact: bool,
}

/// Indices of blocks whose radius equals the spectral radius. Exact when
/// every block's squared radius is exact (comparisons over ℚ); otherwise
/// grouped numerically at relative slack 1e-9.
fn blocks_at_spectral_radius(s: &JordanStructure) -> RadiusGroup {
    let exact_rsq: Option<Vec<Rational>> = s
        .blocks
        .iter()
        .map(|b| match b.radius_sq() {
            RealValue::Exact(q) => Some(q),
            RealValue::Approx(_) => None,
        })
        .collect();
    match exact_rsq {
        Some(rsqs) => {
            let max = rsqs.iter().max().cloned().expect("nonempty structure");
            let indices = rsqs
                .iter()
                .enumerate()
                .filter_map(|(i, q)| (*q == max).then_some(i))
                .collect();
            RadiusGroup {
                indices,
                exact: true,
            }
        }
        None => {
            let rmax = s.spectral_radius;
            let slack = 1e-9 * rmax.max(1.0);
            let indices = s
                .blocks
                .iter()
                .enumerate()
                .filter_map(|(i, b)| ((rmax - b.radius_f64()).abs() <= slack).then_some(i))
                .collect();
            RadiusGroup {
                indices,
                exact: false,
            }
        }
    }
}

struct FamilyDecision {
    records: Vec<MembershipRecord>,
    /// First index whose membership test failed, if any.
    failed: Option<usize>,
    /// Every decision was made exactly.
    exact: bool,
}

/// Evaluates, for every j, whether α_j ∈ span_ℚ({1} ∪ {α_i : i ≠ j}).
fn decide_angle_family(
    angles: &[AngleTurns],
    cfg: &Config,
) -> Result<FamilyDecision, ClassifyError> {
    let k = angles.len();
    debug_assert!(k >= 1);
    if k == 1 {
        // span_ℚ({1}) = ℚ: a single angle is a member iff it is rational.
        let record = match &angles[0] {
            AngleTurns::Exact(er) => match er.as_rational() {
                Some(q) => MembershipRecord {
                    index: 0,
                    member: true,
                    certainty: Certainty::Exact,
                    relation: rational_relation(&q),
                },
                None => MembershipRecord {
                    index: 0,
                    member: false,
                    certainty: Certainty::Exact,
                    relation: none_exact(),
                },
            },
            AngleTurns::Numeric {
                irrational_certified: true,
                ..
            } => MembershipRecord {
                index: 0,
                member: false,
                certainty: Certainty::Exact,
                relation: none_exact(),
            },
            AngleTurns::Numeric { turns, .. } => {
                numeric_membership_record(&[*turns], 0, cfg)?
            }
        };
        return Ok(FamilyDecision {
            failed: (!record.member).then_some(0),
            exact: record.certainty == Certainty::Exact,
            records: vec![record],
        });
    }
    if let Some(exact_angles) = common_basis_family(angles) {
        let mut records = Vec::with_capacity(k);
        for j in 0..k {
            let family: Vec<ExactReal> = exact_angles
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, a)| a.clone())
                .collect();
            let record = match span_membership(&exact_angles[j], &family)? {
                Some(coeffs) => MembershipRecord {
                    index: j,
                    member: true,
                    certainty: Certainty::Exact,
                    relation: relation_from_span(j, k, &coeffs),
                },
                None => MembershipRecord {
                    index: j,
                    member: false,
                    certainty: Certainty::Exact,
                    relation: none_exact(),
                },
            };
            records.push(record);
        }
        let failed = records.iter().find(|r| !r.member).map(|r| r.index);
        return Ok(FamilyDecision {
            records,
            failed,
            exact: true,
        });
    }
    // Numeric fallback: lattice detection on the f64 turns.
    let turns: Vec<f64> = angles.iter().map(|a| a.to_f64()).collect();
    let mut records = Vec::with_capacity(k);
    for j in 0..k {
        records.push(numeric_membership_record(&turns, j, cfg)?);
    }
    let failed = records.iter().find(|r| !r.member).map(|r| r.index);
    Ok(FamilyDecision {
        records,
        failed,
        exact: false,
    })
}

/// All angles as `ExactReal` over one shared basis, if possible (rational
/// values embed into any basis, so only genuinely conflicting irrational
/// bases fail).
fn common_basis_family(angles: &[AngleTurns]) -> Option<Vec<ExactReal>> {
    let exacts: Vec<&ExactReal> = angles
        .iter()
        .map(|a| a.as_exact())
        .collect::<Option<Vec<_>>>()?;
    let widest = exacts
        .iter()
        .max_by_key(|er| er.basis().len())
        .expect("nonempty");
    let target = widest.basis().clone();
    exacts
        .iter()
        .map(|er| er.embed(&target).ok())
        .collect::<Option<Vec<_>>>()
}

fn numeric_membership_record(
    turns: &[f64],
    j: usize,
    cfg: &Config,
) -> Result<MembershipRecord, ClassifyError> {
    // f64 inputs carry ~52 significant bits; pushing the lattice much
    // beyond that only manufactures dyadic artifacts, so the effective
    // precision is clamped into [64, 80].
    let bits = cfg.precision_bits.clamp(64, 80);
    let found = numeric_span_membership(turns, j, cfg.height_bound, bits)?;
    Ok(match found {
        Some(cert) => MembershipRecord {
            index: j,
            member: true,
            certainty: Certainty::Heuristic,
            relation: cert,
        },
        None => MembershipRecord {
            index: j,
            member: false,
            certainty: Certainty::Heuristic,
            relation: RelationCertificate {
                outcome: RelationOutcome::NoneUpToHeight,
                certainty: Certainty::Heuristic,
                height_bound: Some(cfg.height_bound),
                precision_bits: Some(bits),
            },
        },
    })
}

/// q = p/d as the relation d·α = p over the one-angle family.
fn rational_relation(q: &Rational) -> RelationCertificate {
    let v = normalize_relation(vec![q.denom().clone(), q.numer().clone()]);
    RelationCertificate {
        outcome: RelationOutcome::Found {
            s: vec![v[0].clone()],
            t: v[1].clone(),
            residual: 0.0,
        },
        certainty: Certainty::Exact,
        height_bound: None,
        precision_bits: None,
    }
}

/// Converts span coefficients α_j = c₀ + Σ_{i≠j} c_i α_i into the
/// primitive integer relation Σ s_i α_i = t (with s_j ≠ 0).
fn relation_from_span(j: usize, k: usize, coeffs: &SpanCoefficients) -> RelationCertificate {
    let mut rat = vec![Rational::zero(); k + 1];
    rat[j] = Rational::one();
    let mut fi = 0;
    for (i, slot) in rat.iter_mut().enumerate().take(k) {
        if i != j {
            *slot = -coeffs.family[fi].clone();
            fi += 1;
        }
    }
    rat[k] = coeffs.constant.clone();
    let v = normalize_relation(primitive_integer_vector(&rat));
    let (s, t) = v.split_at(k);
    RelationCertificate {
        outcome: RelationOutcome::Found {
            s: s.to_vec(),
            t: t[0].clone(),
            residual: 0.0,
        },
        certainty: Certainty::Exact,
        height_bound: None,
        precision_bits: None,
    }
}

fn none_exact() -> RelationCertificate {
    RelationCertificate {
        outcome: RelationOutcome::NoneUpToHeight,
        certainty: Certainty::Exact,
        height_bound: None,
        precision_bits: None,
    }
}
