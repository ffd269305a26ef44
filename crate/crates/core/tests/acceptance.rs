//! The eight acceptance gates, one test per criterion. Each prints a single
//! `acceptance N (<name>): PASS/FAIL` line (run with `--nocapture` to see
//! them) and asserts both the mathematical content and the runtime budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orbitrefl::classify::{
    classify_orbit_reflexive, classify_r_orbit_reflexive, Answer, Verdict,
};
use orbitrefl::jordan::{
    extract_structure, realize_f64, structure_from_spec, AngleTurns, BlockKind, BlockSpecEntry,
    BlockSpecKind, JordanBlock, JordanStructure, MatrixInput, StructureSource,
};
use orbitrefl::qspan::{
    detect_relation_rational, full_support_relation, moment_curve_rank, Certainty, ExactReal,
    IrrationalBasis,
};
use orbitrefl::torus::{density_gap, weyl_average, Monomial, Turn};
use orbitrefl::witness::{
    build_flip_witness_flat, unit_samples, verify_noncommuting, verify_pointwise_approx, Scaling,
    WitnessMode,
};
use orbitrefl::{Config, MatQ, Matrix, Rational};

fn criterion(n: u32, name: &str, body: impl FnOnce() -> String) {
    let start = Instant::now();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(detail) => {
            println!(
                "acceptance {n} ({name}): PASS — {detail} [{:.2?}]",
                start.elapsed()
            );
        }
        Err(e) => {
            println!("acceptance {n} ({name}): FAIL [{:.2?}]", start.elapsed());
            std::panic::resume_unwind(e);
        }
    }
}

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
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

fn sqrt2_turns(basis: &Arc<IrrationalBasis>) -> ExactReal {
    ExactReal::symbol(basis.clone(), "sqrt2").expect("sqrt2 in basis")
}

fn rational_turns(q: Rational) -> ExactReal {
    ExactReal::from_rational(IrrationalBasis::rational(), q)
}

fn verdicts(structure: &JordanStructure, cfg: &Config) -> (Verdict, Verdict) {
    (
        classify_orbit_reflexive(structure, cfg).expect("orbit classifies"),
        classify_r_orbit_reflexive(structure, cfg).expect("r-orbit classifies"),
    )
}

fn assert_exact_answer(v: &Verdict, expected: bool, label: &str) {
    assert_eq!(
        v.answer,
        if expected { Answer::Yes } else { Answer::No },
        "{label}: wrong answer (rule {})",
        v.rule
    );
    assert_eq!(v.certainty, Certainty::Exact, "{label}: not exact");
}

#[test]
fn acceptance_1_golden_verdict_table() {
    criterion(1, "golden verdict table", || {
        let cfg = Config::default();
        let sqrt2 = IrrationalBasis::with_builtins(&["sqrt2"], 192).expect("basis");

        // Nilpotent [[0,1],[0,0]] through full exact extraction.
        let nilpotent = MatrixInput::Exact(
            MatQ::from_rows(vec![
                vec![rat(0, 1), rat(1, 1)],
                vec![rat(0, 1), rat(0, 1)],
            ])
            .unwrap(),
        );
        let s = extract_structure(&nilpotent, &cfg).expect("extracts");
        let (orbit, r_orbit) = verdicts(&s, &cfg);
        assert_exact_answer(&orbit, true, "nilpotent orbit");
        assert_exact_answer(&r_orbit, true, "nilpotent r-orbit");

        // R_{2pi/3} ⊕ diag(1/2): both yes.
        let s = structure_from_spec(&[
            rot(1, rat(1, 1), rational_turns(rat(1, 3))),
            split(1, rat(1, 2)),
        ])
        .unwrap();
        let (orbit, r_orbit) = verdicts(&s, &cfg);
        assert_exact_answer(&orbit, true, "third-turn orbit");
        assert_exact_answer(&r_orbit, true, "third-turn r-orbit");

        // Single R_{2pi sqrt2}: both no.
        let s = structure_from_spec(&[rot(1, rat(1, 1), sqrt2_turns(&sqrt2))]).unwrap();
        let (orbit, r_orbit) = verdicts(&s, &cfg);
        assert_exact_answer(&orbit, false, "sqrt2 orbit");
        assert_exact_answer(&r_orbit, false, "sqrt2 r-orbit");

        // R_{2pi sqrt2} ⊕ R_{2pi(sqrt2+1/2)}: both yes via -2a1 + 2a2 = 1.
        let shifted = sqrt2_turns(&sqrt2).add_rational(&rat(1, 2));
        let s = structure_from_spec(&[
            rot(1, rat(1, 1), sqrt2_turns(&sqrt2)),
            rot(1, rat(1, 1), shifted),
        ])
        .unwrap();
        let (orbit, r_orbit) = verdicts(&s, &cfg);
        assert_exact_answer(&orbit, true, "dependent pair orbit");
        assert_exact_answer(&r_orbit, true, "dependent pair r-orbit");
        assert!(
            orbit.evidence.memberships.iter().any(|m| m.member),
            "dependent pair should exhibit a membership relation"
        );

        // J_3(1) ⊕ J_1(1): r-orbit no via the split-size gap 3-1 > 1.
        let s = structure_from_spec(&[split(3, rat(1, 1)), split(1, rat(1, 1))]).unwrap();
        let (_, r_orbit) = verdicts(&s, &cfg);
        assert_exact_answer(&r_orbit, false, "split-gap r-orbit");
        assert_eq!(r_orbit.rule, "split-gap");
        assert_eq!(r_orbit.evidence.split_sizes, Some((3, 1)));

        // J_2(R_{2pi sqrt2}): the two properties diverge.
        let s = structure_from_spec(&[rot(2, rat(1, 1), sqrt2_turns(&sqrt2))]).unwrap();
        let (orbit, r_orbit) = verdicts(&s, &cfg);
        assert_exact_answer(&orbit, true, "jordan rotation orbit");
        assert_exact_answer(&r_orbit, false, "jordan rotation r-orbit");

        // diag(1,1): r-orbit yes.
        let s = structure_from_spec(&[split(1, rat(1, 1)), split(1, rat(1, 1))]).unwrap();
        let (_, r_orbit) = verdicts(&s, &cfg);
        assert_exact_answer(&r_orbit, true, "identity r-orbit");

        "7 golden verdicts, all with exact certainty".into()
    });
}

/// Random rational of height <= 999: numerator in [-999, 999], denominator
/// in [1, 9].
fn random_coord(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-999..=999), rng.gen_range(1..=9))
}

fn random_exact(rng: &mut ChaCha8Rng, basis: &Arc<IrrationalBasis>) -> ExactReal {
    let coords = (0..basis.len()).map(|_| random_coord(rng)).collect();
    ExactReal::new(basis.clone(), coords).expect("coords match basis")
}

/// Exact 3x3 rank of the irrational coordinate rows (coordinates on
/// sqrt2, sqrt3, sqrt5; the constant coordinate is irrelevant for
/// dependence over Q together with 1).
fn irrational_rank(family: &[ExactReal]) -> usize {
    let rows: Vec<Vec<Rational>> = family
        .iter()
        .map(|a| a.coords()[1..].to_vec())
        .collect();
    Matrix::from_rows(rows).unwrap().rank_exact()
}

#[test]
fn acceptance_2_relation_engine_oracle_equivalence() {
    criterion(2, "relation-engine oracle equivalence", || {
        let start = Instant::now();
        let basis = IrrationalBasis::with_builtins(&["sqrt2", "sqrt3", "sqrt5"], 256)
            .expect("basis builds");
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let mut agreements = 0usize;
        for instance in 0..100 {
            let dependent = instance % 2 == 0;
            let family: Vec<ExactReal> = if dependent {
                // a3 = (a*a1 + b*a2 + c)/d forces the integer relation
                // a*a1 + b*a2 - d*a3 = -c with height <= 9.
                let a1 = random_exact(&mut rng, &basis);
                let a2 = random_exact(&mut rng, &basis);
                let a = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
                let b = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
                let c = rng.gen_range(-9..=9);
                let d = rng.gen_range(1..=9);
                let a3 = a1
                    .scale(&rat(a, 1))
                    .add(&a2.scale(&rat(b, 1)))
                    .unwrap()
                    .add_rational(&rat(c, 1))
                    .scale(&rat(1, d));
                vec![a1, a2, a3]
            } else {
                // Resample until the irrational coordinate matrix has full
                // rank 3: then no integer relation exists at any height.
                loop {
                    let f: Vec<ExactReal> =
                        (0..3).map(|_| random_exact(&mut rng, &basis)).collect();
                    if irrational_rank(&f) == 3 {
                        break f;
                    }
                }
            };
            let exact = full_support_relation(&family).expect("exact engine runs");
            let values: Vec<Rational> = family.iter().map(|a| a.approx()).collect();
            let numeric =
                detect_relation_rational(&values, 10_000, 128).expect("numeric engine runs");
            assert_eq!(
                exact.found(),
                numeric.found(),
                "instance {instance}: exact {:?} vs numeric {:?}",
                exact.outcome,
                numeric.outcome
            );
            assert_eq!(exact.found(), dependent, "instance {instance} mislabeled");
            if numeric.found() {
                assert!(
                    numeric.verify_exact(&family).expect("verification runs"),
                    "instance {instance}: numeric coefficients fail exact verification"
                );
            }
            agreements += 1;
        }
        assert_eq!(agreements, 100);
        assert!(
            start.elapsed() < Duration::from_secs(60),
            "took {:?}",
            start.elapsed()
        );
        "100/100 agreement, every Found verified exactly".to_string()
    });
}

#[test]
fn acceptance_3_weyl_geometric_bound() {
    criterion(3, "Weyl geometric-sum bound", || {
        let start = Instant::now();
        let alphas = [Turn::Real(2f64.sqrt())];
        let monomial = Monomial {
            exponents: vec![1],
        };
        for n in [100u64, 1_000, 10_000, 100_000] {
            let avg = weyl_average(&alphas, &monomial, n).expect("average computes");
            let bound = avg.bound.expect("irrational pairing has a bound");
            assert!(
                avg.magnitude <= bound,
                "N={n}: |avg| {} exceeds bound {}",
                avg.magnitude,
                bound
            );
        }
        assert!(
            start.elapsed() < Duration::from_secs(5),
            "took {:?}",
            start.elapsed()
        );
        "|avg| within 2/(N·|1−e^{2πiα}|) at N = 10^2..10^5, no tolerance".into()
    });
}

#[test]
fn acceptance_4_density_gap() {
    criterion(4, "torus grid density", || {
        let start = Instant::now();
        let pair = [Turn::Real(2f64.sqrt()), Turn::Real(3f64.sqrt())];
        let report = density_gap(&pair, 1_000_000, 64).expect("density computes");
        assert_eq!(
            report.empty_fraction, 0.0,
            "(sqrt2, sqrt3) should fill a 64^2 grid in 10^6 steps"
        );

        for n in [4u64, 100, 10_000] {
            let quarter = [Turn::Rational { num: 1, den: 4 }];
            let report = density_gap(&quarter, n, 8).expect("density computes");
            assert_eq!(report.empty_fraction, 0.5, "alpha=1/4, N={n}");
        }
        assert!(
            start.elapsed() < Duration::from_secs(30),
            "took {:?}",
            start.elapsed()
        );
        "(√2,√3) fills 64² exactly; α=1/4 leaves exactly half of 8 cells".into()
    });
}

#[test]
fn acceptance_5_witness_approachability() {
    criterion(5, "witness approachability (non-reflexive)", || {
        let start = Instant::now();
        let basis = IrrationalBasis::with_builtins(&["sqrt2"], 192).expect("basis");
        let structure =
            structure_from_spec(&[rot(1, rat(1, 1), sqrt2_turns(&basis))]).unwrap();
        let t = realize_f64(&structure);
        let s = build_flip_witness_flat(&structure, 0).expect("flip witness builds");

        let commutator = verify_noncommuting(&s, &t).expect("commutator computes");
        let closed_form = 2.0 * 2f64.sqrt() * (2.0 * std::f64::consts::PI * 2f64.sqrt()).sin().abs();
        assert!(
            (commutator - closed_form).abs() < 1e-12,
            "commutator {commutator} vs closed form {closed_form}"
        );

        let samples = unit_samples(2, 20, Config::default().seed);
        let results = verify_pointwise_approx(
            &s,
            &t,
            &samples,
            WitnessMode::ROrbit,
            1_000_000,
            Scaling::Plain,
        )
        .expect("verification runs");
        assert_eq!(results.len(), 20);
        for (i, r) in results.iter().enumerate() {
            assert!(
                r.residual < 1e-3,
                "sample {i}: residual {} at n={}",
                r.residual,
                r.best_n
            );
        }
        assert!(
            start.elapsed() < Duration::from_secs(60),
            "took {:?}",
            start.elapsed()
        );
        let worst = results.iter().map(|r| r.residual).fold(0.0, f64::max);
        format!("20/20 residuals < 1e-3 (worst {worst:.2e}), commutator matches 2√2|sin 2π√2|")
    });
}

#[test]
fn acceptance_6_witness_obstruction_plateau() {
    criterion(6, "witness obstruction (reflexive plateau)", || {
        let structure =
            structure_from_spec(&[rot(1, rat(1, 1), rational_turns(rat(1, 3)))]).unwrap();
        let t = realize_f64(&structure);
        let s = build_flip_witness_flat(&structure, 0).expect("flip witness builds");
        let x = vec![1.0, 0.0];
        for n_max in [1_000u64, 10_000, 100_000] {
            let results = verify_pointwise_approx(
                &s,
                &t,
                std::slice::from_ref(&x),
                WitnessMode::ROrbit,
                n_max,
                Scaling::Plain,
            )
            .expect("verification runs");
            let residual = results[0].residual;
            assert!(
                (residual - 0.5).abs() < 1e-9,
                "n_max={n_max}: residual {residual} should plateau at 0.5"
            );
        }
        "minimal residual = 0.5 ± 1e-9 at n_max = 10^3, 10^4, 10^5".into()
    });
}

/// Palette block choices for the round-trip: all spectral points pairwise
/// distinct with gaps >= 0.25, |split values| disjoint from rotation radii
/// so the canonical sort order is immune to extraction noise, and sizes
/// <= 3 so defective-eigenvalue splitting (entry noise ^ 1/size, about
/// 1e-5 here) stays well under the clustering tolerance 1e-4.
struct Palette {
    split_values: Vec<Rational>,
    radii: Vec<Rational>,
    angles: Vec<Rational>,
}

impl Palette {
    fn new() -> Self {
        Palette {
            split_values: vec![
                rat(-5, 2),
                rat(-2, 1),
                rat(-1, 1),
                rat(-1, 2),
                rat(1, 2),
                rat(1, 1),
                rat(2, 1),
                rat(5, 2),
            ],
            radii: vec![rat(3, 4), rat(5, 4), rat(7, 4)],
            angles: vec![
                rat(1, 10),
                rat(1, 8),
                rat(1, 6),
                rat(1, 5),
                rat(1, 4),
                rat(3, 10),
                rat(1, 3),
                rat(2, 5),
            ],
        }
    }
}

/// Assembles 1-3 random pairwise-distinct palette blocks of total ambient
/// dimension <= 8.
fn random_structure(rng: &mut ChaCha8Rng, palette: &Palette) -> JordanStructure {
    loop {
        let count = rng.gen_range(1..=3);
        let mut blocks = Vec::new();
        let mut used_splits: Vec<usize> = Vec::new();
        let mut used_rots: Vec<(usize, usize)> = Vec::new();
        let mut dim = 0usize;
        for _ in 0..count {
            if rng.gen_bool(0.5) {
                let size = rng.gen_range(1..=3usize);
                let v = rng.gen_range(0..palette.split_values.len());
                if used_splits.contains(&v) || dim + size > 8 {
                    continue;
                }
                used_splits.push(v);
                dim += size;
                blocks.push(JordanBlock {
                    size,
                    kind: BlockKind::Split {
                        value: orbitrefl::jordan::RealValue::Exact(
                            palette.split_values[v].clone(),
                        ),
                    },
                });
            } else {
                let size = rng.gen_range(1..=2usize);
                let r = rng.gen_range(0..palette.radii.len());
                let a = rng.gen_range(0..palette.angles.len());
                if used_rots.contains(&(r, a)) || dim + 2 * size > 8 {
                    continue;
                }
                used_rots.push((r, a));
                dim += 2 * size;
                let radius = &palette.radii[r];
                blocks.push(JordanBlock {
                    size,
                    kind: BlockKind::Rotation {
                        radius_sq: orbitrefl::jordan::RealValue::Exact(radius * radius),
                        angle: AngleTurns::Exact(rational_turns(palette.angles[a].clone())),
                    },
                });
            }
        }
        if !blocks.is_empty() {
            return JordanStructure::new(blocks, StructureSource::Exact).unwrap();
        }
    }
}

/// Random integer similarity Q = P (I+L) (I+U) with det ±1 and its exact
/// inverse; a handful of ±1 off-diagonal entries keeps the conditioning
/// mild so conjugation noise stays near f64 round-off.
fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> (MatQ, MatQ) {
    let mut lower = MatQ::identity(n);
    let mut upper = MatQ::identity(n);
    for _ in 0..3.min(n.saturating_sub(1)) {
        let i = rng.gen_range(1..n);
        let j = rng.gen_range(0..i);
        let v = if rng.gen_bool(0.5) { 1 } else { -1 };
        lower.set(i, j, rat(v, 1));
        let i2 = rng.gen_range(1..n);
        let j2 = rng.gen_range(0..i2);
        let w = if rng.gen_bool(0.5) { 1 } else { -1 };
        upper.set(j2, i2, rat(w, 1));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut p = MatQ::zeros(n, n);
    for (row, &col) in perm.iter().enumerate() {
        p.set(row, col, rat(1, 1));
    }
    let q = p.mul(&lower).unwrap().mul(&upper).unwrap();
    let q_inv = unitriangular_inverse(&upper)
        .mul(&unitriangular_inverse(&lower))
        .unwrap()
        .mul(&p.transpose())
        .unwrap();
    (q, q_inv)
}

/// (I+N)^{-1} = I - N + N^2 - ... for unitriangular I+N (N nilpotent).
fn unitriangular_inverse(m: &MatQ) -> MatQ {
    let n = m.rows();
    let nil = m.sub(&MatQ::identity(n)).unwrap();
    let mut inv = MatQ::identity(n);
    let mut term = MatQ::identity(n);
    for _ in 0..n {
        term = term.mul(&nil).unwrap().scale(&rat(-1, 1));
        inv = inv.add(&term).unwrap();
    }
    inv
}

fn angle_of(b: &JordanBlock) -> Option<f64> {
    match &b.kind {
        BlockKind::Rotation { angle, .. } => Some(angle.to_f64()),
        BlockKind::Split { .. } => None,
    }
}

fn split_value_of(b: &JordanBlock) -> Option<f64> {
    match &b.kind {
        BlockKind::Split { value } => Some(value.to_f64()),
        BlockKind::Rotation { .. } => None,
    }
}

#[test]
fn acceptance_7_jordan_round_trip() {
    criterion(7, "Jordan structure round-trip", || {
        let start = Instant::now();
        // A defective eigenvalue of block size m under entry noise eps
        // splits its root cluster by eps^(1/m); conjugation keeps eps near
        // 1e-14, so sizes <= 3 split by at most ~2e-5 and a clustering
        // tolerance of 1e-4 re-merges every cluster without ever bridging
        // the >= 0.25 palette gaps between distinct eigenvalues.
        let cfg = Config {
            tol: 1e-4,
            ..Config::default()
        };
        let palette = Palette::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let mut recovered_ok = 0usize;
        for instance in 0..50 {
            let expected = random_structure(&mut rng, &palette);
            let b = realize_f64(&expected);
            let (q, q_inv) = random_similarity(&mut rng, expected.dimension);
            let a = q.to_f64().mul(&b).unwrap().mul(&q_inv.to_f64()).unwrap();
            let got = extract_structure(&MatrixInput::Numeric(a), &cfg)
                .unwrap_or_else(|e| panic!("instance {instance}: extraction failed: {e}"));
            assert_eq!(
                got.blocks.len(),
                expected.blocks.len(),
                "instance {instance}: block count"
            );
            for (g, e) in got.blocks.iter().zip(expected.blocks.iter()) {
                assert_eq!(g.size, e.size, "instance {instance}: size");
                assert_eq!(
                    g.is_split(),
                    e.is_split(),
                    "instance {instance}: kind"
                );
                assert!(
                    (g.radius_f64() - e.radius_f64()).abs() < 1e-6,
                    "instance {instance}: radius {} vs {}",
                    g.radius_f64(),
                    e.radius_f64()
                );
                match (angle_of(g), angle_of(e)) {
                    (Some(ga), Some(ea)) => assert!(
                        (ga - ea).abs() < 1e-6,
                        "instance {instance}: angle {ga} vs {ea}"
                    ),
                    (None, None) => {
                        let (gv, ev) = (split_value_of(g).unwrap(), split_value_of(e).unwrap());
                        assert!(
                            (gv - ev).abs() < 1e-6,
                            "instance {instance}: value {gv} vs {ev}"
                        );
                    }
                    _ => unreachable!("kinds already matched"),
                }
            }
            recovered_ok += 1;
        }
        assert_eq!(recovered_ok, 50);
        assert!(
            start.elapsed() < Duration::from_secs(120),
            "took {:?}",
            start.elapsed()
        );
        "50/50 conjugated structures recovered (sizes/kinds exact, angles < 1e-6 turns)".into()
    });
}

#[test]
fn acceptance_8_moment_curve_rank() {
    criterion(8, "moment-curve rank", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let mut sets = 0usize;
        for n in 1..=8usize {
            for _ in 0..25 {
                let points = distinct_rationals(&mut rng, n);
                let rank = moment_curve_rank(&points, n).expect("rank computes");
                assert_eq!(rank, n, "points {points:?}");
                sets += 1;
            }
        }
        assert_eq!(sets, 200);
        "rank = n on 200 distinct-rational point sets, n = 1..8".into()
    });
}

fn distinct_rationals(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let mut points: Vec<Rational> = Vec::with_capacity(n);
    while points.len() < n {
        let candidate = rat(rng.gen_range(-99..=99), rng.gen_range(1..=9));
        if !points.contains(&candidate) {
            points.push(candidate);
        }
    }
    points
}
