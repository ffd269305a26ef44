//! Randomized contracts tying the layers together: ℚ-affine invariance of
//! the span test, unimodularity of lattice reduction, full moment-curve
//! rank, scale- and representative-invariance of the classifier, the exact
//! geometric bounds behind equidistribution, and the two behaviours every
//! built witness must show (approach for failing structures, a residual
//! floor when a rational relation pins the orbit closure).

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orbitrefl::classify::{
    classify_orbit_reflexive, classify_r_orbit_reflexive, to_lemma_hard_form, Answer,
};
use orbitrefl::jordan::{
    normalize_turns, realize_f64, structure_from_spec, BlockSpecEntry, BlockSpecKind,
};
use orbitrefl::qspan::{
    full_support_relation, lll_reduce, moment_curve_rank, span_membership, Certainty, ExactReal,
    IrrationalBasis, RelationOutcome,
};
use orbitrefl::torus::{weyl_average, Monomial, Turn};
use orbitrefl::witness::{
    build_flip_witness_flat, unit_samples, verify_noncommuting, verify_pointwise_approx, Scaling,
    WitnessMode,
};
use orbitrefl::{Config, MatQ, Rational};

fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

/// Shared declared basis (1, √2, √3) with 192-bit approximations.
fn basis() -> Arc<IrrationalBasis> {
    static BASIS: OnceLock<Arc<IrrationalBasis>> = OnceLock::new();
    BASIS
        .get_or_init(|| IrrationalBasis::with_builtins(&["sqrt2", "sqrt3"], 192).expect("basis"))
        .clone()
}

/// c0 + c1·√2 + c2·√3 over the shared basis.
fn er(c0: Rational, c1: Rational, c2: Rational) -> ExactReal {
    ExactReal::new(basis(), vec![c0, c1, c2]).expect("three coordinates")
}

fn split(size: usize, value: Rational) -> BlockSpecEntry {
    BlockSpecEntry {
        size,
        kind: BlockSpecKind::Split { value },
    }
}

fn rot(size: usize, radius: Rational, angle_turns: ExactReal) -> BlockSpecEntry {
    BlockSpecEntry {
        size,
        kind: BlockSpecKind::Rotation {
            radius,
            angle_turns,
        },
    }
}

/// Mixed rational / irrational angle palette for random structures.
fn random_angle(rng: &mut ChaCha8Rng) -> ExactReal {
    match rng.gen_range(0..7) {
        0 => er(q(1, 3), q(0, 1), q(0, 1)),
        1 => er(q(1, 5), q(0, 1), q(0, 1)),
        2 => er(q(3, 10), q(0, 1), q(0, 1)),
        3 => er(q(0, 1), q(1, 1), q(0, 1)), // √2
        4 => er(q(0, 1), q(1, 2), q(0, 1)), // √2/2
        5 => er(q(1, 5), q(1, 1), q(0, 1)), // √2 + 1/5
        _ => er(q(0, 1), q(0, 1), q(1, 3)), // √3/3
    }
}

proptest! {
    // Membership in span_Q({1} ∪ F) only sees the line through the target
    // modulo rationals, so α ↦ q·α + r (q ≠ 0) never changes the answer;
    // and a positive answer must hand back coefficients that reconstruct
    // the target exactly.
    #[test]
    fn span_membership_is_affine_invariant(
        c0 in -9i64..=9, c1 in -9i64..=9, c2 in -9i64..=9,
        qn in -9i64..=9, qd in 1i64..=9,
        rn in -9i64..=9, rd in 1i64..=9,
    ) {
        prop_assume!(qn != 0);
        let target = er(q(c0, 2), q(c1, 3), q(c2, 5));
        let family = [er(q(0, 1), q(1, 1), q(0, 1))];
        let before = span_membership(&target, &family).unwrap();
        // Against span{1, √2}, membership is exactly "no √3 component".
        prop_assert_eq!(before.is_some(), c2 == 0);
        if let Some(coeffs) = &before {
            let recon = ExactReal::from_rational(basis(), coeffs.constant.clone())
                .add(&family[0].scale(&coeffs.family[0]))
                .unwrap();
            prop_assert_eq!(&recon, &target);
        }
        let image = target.scale(&q(qn, qd)).add_rational(&q(rn, rd));
        let after = span_membership(&image, &family).unwrap();
        prop_assert_eq!(before.is_some(), after.is_some());
    }

    // Planting s1·α1 + s2·α2 + s3·α3 = t with all s_j ≠ 0 leaves a rank-1
    // relation lattice, so the engine must find a full-support relation
    // and its certificate must verify by exact arithmetic.
    #[test]
    fn full_support_certificates_verify_exactly(
        s1 in -6i64..=6, s2 in -6i64..=6, s3 in -6i64..=6,
        tn in -9i64..=9,
        u1 in -4i64..=4, u2 in -4i64..=4,
    ) {
        prop_assume!(s1 != 0 && s2 != 0 && s3 != 0);
        let a1 = er(q(u1, 3), q(1, 1), q(0, 1));
        let a2 = er(q(u2, 5), q(0, 1), q(1, 1));
        let a3 = ExactReal::from_rational(basis(), q(tn, 2))
            .sub(&a1.scale(&q(s1, 1)))
            .unwrap()
            .sub(&a2.scale(&q(s2, 1)))
            .unwrap()
            .scale(&q(1, s3));
        let alphas = [a1, a2, a3];
        let cert = full_support_relation(&alphas).unwrap();
        prop_assert_eq!(cert.certainty, Certainty::Exact);
        match &cert.outcome {
            RelationOutcome::Found { s, .. } => {
                prop_assert!(s.iter().all(|c| !c.is_zero()));
                prop_assert!(cert.verify_exact(&alphas).unwrap());
            }
            other => prop_assert!(false, "expected Found, got {other:?}"),
        }
    }

    // Vandermonde: distinct points on the moment curve are independent.
    #[test]
    fn moment_curve_rank_is_full_for_distinct_points(
        raw in proptest::collection::btree_set((-100i64..=100, 1i64..=10), 1..=12),
    ) {
        let mut points: Vec<Rational> = raw.iter().map(|(p, d)| q(*p, *d)).collect();
        // Distinct (p, d) pairs can still collide as rationals (2/4 = 1/2).
        points.sort();
        points.dedup();
        let n = points.len();
        prop_assert_eq!(moment_curve_rank(&points, n).unwrap(), n);
    }

    // A rotation block and its conjugate are the same real block: the
    // normalized representative in (0, 1/2) ignores both the sign flip
    // α ↦ 1 − α and whole-turn shifts.
    #[test]
    fn conjugate_angle_representatives_normalize_identically(
        p in -40i64..=40, d in 1i64..=12,
        b0 in -6i64..=6, b1 in -5i64..=5,
        k in -3i64..=3,
    ) {
        let frac = q(p, d) - q(p, d).floor();
        prop_assume!(!frac.is_zero() && frac != q(1, 2));
        prop_assume!(b1 != 0);
        let one = ExactReal::from_rational(basis(), q(1, 1));
        let rational_angle = er(q(p, d), q(0, 1), q(0, 1));
        let irrational_angle = er(q(b0, 7), q(b1, 4), q(0, 1));
        for angle in [rational_angle, irrational_angle] {
            let norm = normalize_turns(&angle).unwrap();
            let conj = normalize_turns(&one.sub(&angle).unwrap()).unwrap();
            let shifted = normalize_turns(&angle.add_rational(&q(k, 1))).unwrap();
            prop_assert_eq!(&norm, &conj);
            prop_assert_eq!(&norm, &shifted);
            let a = norm.approx();
            prop_assert!(a > Rational::zero() && a < q(1, 2));
        }
    }

    // |(1/N)·Σ e^{2πin⟨m,α⟩}| ≤ 2/(N·|1 − e^{2πi⟨m,α⟩}|) is an exact
    // geometric-series identity whenever the pairing is not an integer.
    #[test]
    fn weyl_average_stays_under_geometric_bound(
        a1 in 0.01f64..0.99, a2 in 0.01f64..0.99,
        e1 in -3i64..=3, e2 in -3i64..=3,
        n in 10u64..=3000,
    ) {
        prop_assume!(e1 != 0 || e2 != 0);
        let turns = [Turn::Real(a1), Turn::Real(a2)];
        let f = Monomial { exponents: vec![e1, e2] };
        let avg = weyl_average(&turns, &f, n).unwrap();
        if let Some(bound) = avg.bound {
            // Compensated stepping leaves at most sub-ulp noise on the sum.
            prop_assert!(avg.magnitude <= bound * (1.0 + 1e-9) + 1e-12);
        }
    }

    // When ⟨m, α⟩ ∈ ℤ the monomial is constant 1 on the whole orbit and
    // the average is exactly 1 — the subgroup direction of the dichotomy,
    // with no floating error because rational turns step exactly.
    #[test]
    fn integral_monomials_average_to_exactly_one(
        p1 in 0i64..=11, d1 in 1i64..=12, c1 in -2i64..=2,
        p2 in 0i64..=11, d2 in 1i64..=12, c2 in -2i64..=2,
        n in 1u64..=3000,
    ) {
        let turns = [
            Turn::Rational { num: p1, den: d1 },
            Turn::Rational { num: p2, den: d2 },
        ];
        let f = Monomial { exponents: vec![c1 * d1, c2 * d2] };
        let avg = weyl_average(&turns, &f, n).unwrap();
        prop_assert_eq!(avg.re, 1.0);
        prop_assert_eq!(avg.im, 0.0);
        prop_assert_eq!(avg.magnitude, 1.0);
        prop_assert!(avg.bound.is_none());
    }
}

/// Every `target` row solves uniquely and integrally over the `base` rows;
/// holding in both directions pins a determinant-±1 change of basis.
fn integral_row_span(base: &[Vec<BigInt>], target: &[Vec<BigInt>]) -> bool {
    let d = base[0].len();
    let at = MatQ::from_rows(
        (0..d)
            .map(|c| base.iter().map(|r| Rational::from(r[c].clone())).collect())
            .collect(),
    )
    .expect("rectangular");
    target.iter().all(|row| {
        let rhs: Vec<Rational> = row.iter().map(|x| Rational::from(x.clone())).collect();
        matches!(
            at.solve_exact(&rhs),
            Ok(Some(sol)) if sol.iter().all(|c| c.is_integer())
        )
    })
}

#[test]
fn lll_reduction_preserves_the_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD_0001);
    let delta = q(3, 4);
    for round in 0..40 {
        let k = rng.gen_range(2..=4usize);
        let d = k + rng.gen_range(0..=3usize);
        // [I_k | R] rows are independent for any integer block R.
        let rows: Vec<Vec<BigInt>> = (0..k)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if j < k {
                            BigInt::from(i64::from(i == j))
                        } else {
                            BigInt::from(rng.gen_range(-30i64..=30))
                        }
                    })
                    .collect()
            })
            .collect();
        let reduced = lll_reduce(&rows, &delta).expect("reduces");
        assert_eq!(reduced.len(), k, "round {round}: row count changed");
        assert!(
            reduced.iter().all(|r| r.iter().any(|x| !x.is_zero())),
            "round {round}: zero row"
        );
        assert!(
            integral_row_span(&rows, &reduced),
            "round {round}: reduced rows left the input lattice"
        );
        assert!(
            integral_row_span(&reduced, &rows),
            "round {round}: input rows missing from the reduced lattice"
        );
    }
}

/// Random block list mixing splits and rotations; all data exact.
fn random_block_spec(rng: &mut ChaCha8Rng) -> Vec<BlockSpecEntry> {
    let values = [
        q(-2, 1),
        q(-1, 1),
        q(-1, 2),
        q(0, 1),
        q(1, 2),
        q(1, 1),
        q(2, 1),
        q(3, 1),
    ];
    let radii = [q(1, 2), q(1, 1), q(3, 2), q(2, 1)];
    (0..rng.gen_range(1..=3usize))
        .map(|_| {
            if rng.gen_bool(0.5) {
                split(
                    rng.gen_range(1..=3),
                    values[rng.gen_range(0..values.len())].clone(),
                )
            } else {
                rot(
                    rng.gen_range(1..=2),
                    radii[rng.gen_range(0..radii.len())].clone(),
                    random_angle(rng),
                )
            }
        })
        .collect()
}

#[test]
fn r_orbit_verdicts_are_scale_invariant() {
    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD_0002);
    let scales = [
        q(1, 4),
        q(1, 3),
        q(1, 2),
        q(2, 3),
        q(3, 2),
        q(2, 1),
        q(3, 1),
        q(5, 1),
    ];
    for round in 0..30 {
        let entries = random_block_spec(&mut rng);
        let c = scales[rng.gen_range(0..scales.len())].clone();
        let scaled: Vec<BlockSpecEntry> = entries
            .iter()
            .map(|e| BlockSpecEntry {
                size: e.size,
                kind: match &e.kind {
                    BlockSpecKind::Split { value } => BlockSpecKind::Split {
                        value: value * &c,
                    },
                    BlockSpecKind::Rotation {
                        radius,
                        angle_turns,
                    } => BlockSpecKind::Rotation {
                        radius: radius * &c,
                        angle_turns: angle_turns.clone(),
                    },
                },
            })
            .collect();
        let a = structure_from_spec(&entries).expect("structure");
        let b = structure_from_spec(&scaled).expect("scaled structure");
        let va = classify_r_orbit_reflexive(&a, &cfg).expect("classifies");
        let vb = classify_r_orbit_reflexive(&b, &cfg).expect("classifies scaled");
        assert_eq!(
            (va.answer, va.rule),
            (vb.answer, vb.rule),
            "round {round}: verdict moved under scaling by {c}"
        );
    }
}

#[test]
fn flat_form_orbit_and_r_orbit_verdicts_agree() {
    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD_0003);
    for round in 0..30 {
        let mut entries = Vec::new();
        for _ in 0..rng.gen_range(1..=3usize) {
            entries.push(rot(1, q(1, 1), random_angle(&mut rng)));
        }
        if rng.gen_bool(0.4) {
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            entries.push(split(1, q(sign, 1)));
        }
        if rng.gen_bool(0.4) {
            entries.push(split(rng.gen_range(1..=2), q(1, 2)));
        }
        let s = structure_from_spec(&entries).expect("structure");
        to_lemma_hard_form(&s).expect("flat form applies");
        let orbit = classify_orbit_reflexive(&s, &cfg).expect("orbit");
        let r_orbit = classify_r_orbit_reflexive(&s, &cfg).expect("r-orbit");
        assert_eq!(
            orbit.answer, r_orbit.answer,
            "round {round}: {} vs {}",
            orbit.rule, r_orbit.rule
        );
    }
}

#[test]
fn rational_angles_classify_as_finite_orbit() {
    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD_0004);
    let rats = [
        q(1, 3),
        q(1, 4),
        q(1, 5),
        q(2, 5),
        q(1, 8),
        q(3, 10),
        q(1, 6),
        q(5, 12),
    ];
    for round in 0..25 {
        let mut entries = Vec::new();
        for _ in 0..rng.gen_range(1..=3usize) {
            let a = rats[rng.gen_range(0..rats.len())].clone();
            entries.push(rot(1, q(1, 1), er(a, q(0, 1), q(0, 1))));
        }
        if rng.gen_bool(0.5) {
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            entries.push(split(1, q(sign, 1)));
        }
        if rng.gen_bool(0.5) {
            entries.push(split(rng.gen_range(1..=2), q(-2, 3)));
        }
        let s = structure_from_spec(&entries).expect("structure");
        let orbit = classify_orbit_reflexive(&s, &cfg).expect("orbit");
        assert_eq!(
            (orbit.answer, orbit.rule.as_str()),
            (Answer::Yes, "finite-orbit"),
            "round {round}"
        );
        assert_eq!(orbit.certainty, Certainty::Exact, "round {round}");
        let r_orbit = classify_r_orbit_reflexive(&s, &cfg).expect("r-orbit");
        assert_eq!(r_orbit.answer, Answer::Yes, "round {round}");
        assert_eq!(r_orbit.certainty, Certainty::Exact, "round {round}");
    }
}

#[test]
fn spectral_radius_matches_power_norm_estimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xABCD_0005);
    let radii = [q(3, 5), q(4, 5), q(1, 1), q(5, 4), q(7, 4)];
    let angles = [q(1, 3), q(1, 5), q(2, 5), q(3, 8)];
    for round in 0..20 {
        let entries: Vec<BlockSpecEntry> = (0..rng.gen_range(1..=4usize))
            .map(|_| {
                let r = radii[rng.gen_range(0..radii.len())].clone();
                if rng.gen_bool(0.5) {
                    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                    split(1, r * q(sign, 1))
                } else {
                    let a = angles[rng.gen_range(0..angles.len())].clone();
                    rot(1, r, er(a, q(0, 1), q(0, 1)))
                }
            })
            .collect();
        let s = structure_from_spec(&entries).expect("structure");
        // Size-1 blocks only: T is normal, so ‖T^n‖_F^(1/n) → r(T) with the
        // dimension factor decaying as N^(1/(2n)).
        let t = realize_f64(&s);
        let p = t.pow(256).expect("powers");
        let est = p.frobenius().powf(1.0 / 256.0);
        let rel = (est / s.spectral_radius - 1.0).abs();
        assert!(
            rel < 0.05,
            "round {round}: ‖T^256‖^(1/256) = {est} vs spectral radius {}",
            s.spectral_radius
        );
    }
}

#[test]
fn dependent_angle_pair_obstructs_the_flip_pointwise() {
    let sqrt2 = er(q(0, 1), q(1, 1), q(0, 1));
    let shifted = sqrt2.add_rational(&q(1, 2));
    let s = structure_from_spec(&[rot(1, q(1, 1), sqrt2), rot(1, q(1, 1), shifted)])
        .expect("structure");
    let cfg = Config::default();
    let orbit = classify_orbit_reflexive(&s, &cfg).expect("orbit");
    assert_eq!(
        (orbit.answer, orbit.rule.as_str()),
        (Answer::Yes, "lemma-hard-relation")
    );
    let flip = build_flip_witness_flat(&s, 0).expect("builds");
    let t = realize_f64(&s);
    let samples = unit_samples(4, 20, 0xC0FFEE);
    let ladder: Vec<Vec<f64>> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&n_max| {
            verify_pointwise_approx(&flip, &t, &samples, WitnessMode::Orbit, n_max, Scaling::Plain)
                .expect("scan")
                .iter()
                .map(|r| r.residual)
                .collect()
        })
        .collect();
    for (i, ((r0, r1), r2)) in ladder[0].iter().zip(&ladder[1]).zip(&ladder[2]).enumerate() {
        assert!(*r1 <= *r0 + 1e-12, "sample {i} grew");
        assert!(*r2 <= *r1 + 1e-12, "sample {i} grew");
    }
    // −2α1 + 2α2 = 1 pins (nα1, nα2) to two diagonal cosets of the torus,
    // and for generic x the flip's target phase lies outside both, so some
    // sample keeps a residual floor no budget can erode.
    let floored = (0..samples.len())
        .filter(|&i| ladder.iter().all(|rung| rung[i] > 0.05))
        .count();
    assert!(floored >= 1, "no sample kept a residual floor");
}

#[test]
fn failing_orbit_witness_residuals_shrink_with_budget() {
    let s = structure_from_spec(&[rot(1, q(1, 1), er(q(0, 1), q(1, 1), q(0, 1)))])
        .expect("structure");
    let t = realize_f64(&s);
    let flip = build_flip_witness_flat(&s, 0).expect("builds");
    assert!(verify_noncommuting(&flip, &t).expect("commutator") > 0.1);
    let samples = unit_samples(2, 20, 0xC0FFEE);
    let worst: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&n_max| {
            verify_pointwise_approx(&flip, &t, &samples, WitnessMode::Orbit, n_max, Scaling::Plain)
                .expect("scan")
                .iter()
                .map(|r| r.residual)
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(
        worst[1] <= worst[0] + 1e-12 && worst[2] <= worst[1] + 1e-12,
        "worst residual grew along the budget ladder: {worst:?}"
    );
    assert!(
        worst[2] < 1e-2,
        "orbit density should erode the worst residual, got {}",
        worst[2]
    );
}
