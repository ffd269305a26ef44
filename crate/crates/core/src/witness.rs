//! Counterexample operators for non-reflexive structures, and numeric
//! verification of both halves of non-reflexivity.
//!
//! When the classifier answers *no*, an explicit S exists with
//!
//! 1. S ∉ the algebra side — here certified by ST ≠ TS (any strong limit
//!    of scaled powers commutes with T), and
//! 2. S in the *pointwise* closure: for every single vector x there are
//!    scalars λ_n and powers k_n with λ_n T^{k_n} x → S x.
//!
//! Three constructions cover the three failing rules:
//!
//! * flat case (orbit reflexivity, distinguished independent angle α_d):
//!   S = F on the distinguished rotation plane, I on the other rotation
//!   planes and on the ±1 part, 0 on the contractive part, where
//!   F = [[0,1],[1,0]] is the flip. Unscaled powers approach S one vector
//!   at a time — on each plane, orbits are dense on circles — but never
//!   uniformly: F reverses orientation while every R_θ preserves it.
//! * Jordan case (ℝ-orbit, size-m blocks at the spectral radius): the
//!   block operator matrix with F in the top-right m-corner of the
//!   distinguished rotation block, I in the top-right corner of every
//!   other size-m block at the radius, 0 elsewhere. Powers scaled by
//!   1/(r^n·C(n, m−1)) converge cell-wise to such corners.
//! * split gap (ℝ-orbit, all-split radius with largest block m at least
//!   two bigger than the next): S = E_{1,m−1} on the unique largest
//!   block, 0 elsewhere. Vectors weighting the top Jordan height need
//!   λ_n ≍ 1/C(n, m−1), lower heights need 1/C(n, m−2); each vector has
//!   its own sequence, no single sequence serves all — exactly the
//!   pointwise/strong gap.
//!
//! The verifier does not reconstruct the parity-constrained subsequences
//! the existence proof uses; it scans all n ≤ n_max and reports the best
//! (n, λ): existence is what is being checked, not a particular schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{Answer, Verdict};
use crate::jordan::{realize_f64, BlockKind, JordanBlock, JordanStructure};
use crate::matrix::MatrixError;
use crate::{Config, MatF};

#[derive(Debug, Error, PartialEq)]
pub enum WitnessError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("the verdict is yes; a flip witness would be vacuous")]
    Reflexive,
    #[error("no witness construction is attached to rule `{0}`")]
    UnsupportedRule(String),
    #[error("sample vector {0} is zero")]
    ZeroSample(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Which closure the scan approximates membership in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMode {
    /// Plain powers T^n; λ is fixed to 1.
    Orbit,
    /// Scaled powers λT^n; λ chosen per n by least squares.
    ROrbit,
}

/// Pre-normalization applied to T^n during the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scaling {
    Plain,
    /// Divide T^n by C(n, m−1): stabilizes Jordan-case scans. An
    /// equivalent reparametrization of λ, so it needs `ROrbit` mode.
    Binomial { m: usize },
}

/// Best approximation found for one sample vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub x: Vec<f64>,
    pub best_n: u64,
    /// Scalar with residual = ‖λ·T^best_n·x − Sx‖. Exactly 1 in orbit
    /// mode; may underflow to 0 when ‖T^n x‖ overflows the scan's range.
    pub best_lambda: f64,
    pub residual: f64,
}

/// A built witness together with its numeric verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub mode: WitnessMode,
    /// Classifier rule the construction answers.
    pub rule: String,
    /// Row-major S.
    pub s_matrix: Vec<Vec<f64>>,
    /// ‖ST − TS‖ (Frobenius); must be positive for a valid witness.
    pub commutator_norm: f64,
    pub scaling: Scaling,
    pub samples: Vec<SampleResult>,
    pub search_budget: u64,
    pub seed: u64,
}

fn at_radius(b: &JordanBlock, r: f64) -> bool {
    (b.radius_f64() - r).abs() <= 1e-9 * r.max(1.0)
}

fn flip2() -> MatF {
    MatF::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).expect("2x2")
}

/// S = F ⊕ I ⊕ … ⊕ I ⊕ (I on ±1 splits) ⊕ (0 on the contractive part)
/// for a flat structure: every block at the spectral radius (which must
/// be 1) has size one. `distinguished` indexes the radius-1 rotation
/// blocks in structure order and receives the flip.
pub fn build_flip_witness_flat(
    structure: &JordanStructure,
    distinguished: usize,
) -> Result<MatF, WitnessError> {
    let r = structure.spectral_radius;
    if (r - 1.0).abs() > 1e-6 {
        return Err(WitnessError::Invalid(format!(
            "flat witness requires spectral radius 1, found {r}"
        )));
    }
    if structure
        .blocks
        .iter()
        .any(|b| at_radius(b, r) && b.size > 1)
    {
        return Err(WitnessError::Invalid(
            "structure is not flat: a block at the spectral radius has size > 1".into(),
        ));
    }
    let mut rotation_counter = 0usize;
    let mut pieces = Vec::new();
    for b in &structure.blocks {
        if at_radius(b, r) {
            match b.kind {
                BlockKind::Rotation { .. } => {
                    if rotation_counter == distinguished {
                        pieces.push(flip2());
                    } else {
                        pieces.push(MatF::identity(2));
                    }
                    rotation_counter += 1;
                }
                BlockKind::Split { .. } => pieces.push(MatF::identity(1)),
            }
        } else {
            pieces.push(MatF::zeros(b.dim(), b.dim()));
        }
    }
    if distinguished >= rotation_counter {
        return Err(WitnessError::Invalid(format!(
            "distinguished rotation index {distinguished} out of range ({rotation_counter} rotations at the radius)"
        )));
    }
    Ok(MatF::block_diag(&pieces))
}

/// Corner witness for the Jordan case: with m the largest block size at
/// the spectral radius, S carries F in the top-right m-corner of the
/// distinguished size-m rotation block, I in the top-right corner of
/// every other size-m block at the radius, and 0 elsewhere.
/// `distinguished` indexes the size-m *rotation* blocks at the radius in
/// structure order.
pub fn build_flip_witness_jordan(
    structure: &JordanStructure,
    distinguished: usize,
) -> Result<MatF, WitnessError> {
    let r = structure.spectral_radius;
    if r <= 0.0 {
        return Err(WitnessError::Invalid(
            "corner witness needs a positive spectral radius".into(),
        ));
    }
    let m = structure
        .blocks
        .iter()
        .filter(|b| at_radius(b, r))
        .map(|b| b.size)
        .max()
        .ok_or_else(|| WitnessError::Invalid("no blocks at the spectral radius".into()))?;
    let mut family_counter = 0usize;
    let mut pieces = Vec::new();
    for b in &structure.blocks {
        if at_radius(b, r) && b.size == m {
            match b.kind {
                BlockKind::Rotation { .. } => {
                    let corner = if family_counter == distinguished {
                        flip2()
                    } else {
                        MatF::identity(2)
                    };
                    family_counter += 1;
                    pieces.push(corner_block(m, 2, &corner));
                }
                BlockKind::Split { .. } => pieces.push(corner_block(m, 1, &MatF::identity(1))),
            }
        } else {
            pieces.push(MatF::zeros(b.dim(), b.dim()));
        }
    }
    if distinguished >= family_counter {
        return Err(WitnessError::Invalid(format!(
            "distinguished block index {distinguished} out of range ({family_counter} size-{m} rotation blocks at the radius)"
        )));
    }
    Ok(MatF::block_diag(&pieces))
}

/// m×m block operator matrix (cells of size `cell`) with `corner` in the
/// (1, m) cell and zeros elsewhere.
fn corner_block(m: usize, cell: usize, corner: &MatF) -> MatF {
    let d = m * cell;
    let mut rows = vec![vec![0.0; d]; d];
    for (i, row) in rows.iter_mut().enumerate().take(cell) {
        for j in 0..cell {
            row[(m - 1) * cell + j] = *corner.at(i, j);
        }
    }
    MatF::from_rows(rows).expect("square corner block")
}

/// Witness for the all-split gap case: S = E_{1,m−1} on the unique
/// largest split block at the radius (size m ≥ 2, next size ≤ m−2),
/// zero elsewhere.
pub fn build_split_gap_witness(structure: &JordanStructure) -> Result<MatF, WitnessError> {
    let r = structure.spectral_radius;
    if r <= 0.0 {
        return Err(WitnessError::Invalid(
            "split-gap witness needs a positive spectral radius".into(),
        ));
    }
    let mut sizes: Vec<usize> = structure
        .blocks
        .iter()
        .filter(|b| at_radius(b, r))
        .map(|b| {
            if b.is_split() {
                Ok(b.size)
            } else {
                Err(WitnessError::Invalid(
                    "split-gap witness requires every block at the radius to be split".into(),
                ))
            }
        })
        .collect::<Result<_, _>>()?;
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let m = *sizes
        .first()
        .ok_or_else(|| WitnessError::Invalid("no blocks at the spectral radius".into()))?;
    let second = sizes.get(1).copied().unwrap_or(0);
    if m.saturating_sub(second) <= 1 {
        return Err(WitnessError::Invalid(format!(
            "split sizes ({m}, {second}) have no gap > 1; the structure is reflexive"
        )));
    }
    let mut placed = false;
    let mut pieces = Vec::new();
    for b in &structure.blocks {
        if !placed && at_radius(b, r) && b.size == m {
            let mut rows = vec![vec![0.0; m]; m];
            rows[0][m - 2] = 1.0;
            pieces.push(MatF::from_rows(rows).expect("square"));
            placed = true;
        } else {
            pieces.push(MatF::zeros(b.dim(), b.dim()));
        }
    }
    Ok(MatF::block_diag(&pieces))
}

/// ‖ST − TS‖ (Frobenius). Positive for every valid witness: strong
/// limits of scaled powers commute with T.
pub fn verify_noncommuting(s: &MatF, t: &MatF) -> Result<f64, WitnessError> {
    let st = s.mul(t)?;
    let ts = t.mul(s)?;
    Ok(st.sub(&ts)?.frobenius())
}

/// Unit-norm Gaussian sample vectors; deterministic for a fixed seed.
pub fn unit_samples(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-9 {
                return v.iter().map(|a| a / n).collect();
            }
        })
        .collect()
}

/// For each sample x, scans n = 0..=n_max and records the best
/// approximation of Sx by λ·T^n·x: λ is the per-n least-squares scalar
/// ⟨T^n x, Sx⟩/‖T^n x‖² in r-orbit mode and fixed to 1 in orbit mode.
/// The binomial option divides T^n by C(n, m−1) — a reparametrization of
/// λ that keeps Jordan-case scans in floating range, so it is only
/// accepted together with r-orbit mode (where the direction is also
/// renormalized on overflow; reported λ stays faithful to raw T^n x,
/// underflowing to 0 past ~1e300).
pub fn verify_pointwise_approx(
    s: &MatF,
    t: &MatF,
    samples: &[Vec<f64>],
    mode: WitnessMode,
    n_max: u64,
    scaling: Scaling,
) -> Result<Vec<SampleResult>, WitnessError> {
    if s.rows() != s.cols() || t.rows() != t.cols() || s.rows() != t.rows() {
        return Err(WitnessError::Invalid(format!(
            "S is {}x{} but T is {}x{}",
            s.rows(),
            s.cols(),
            t.rows(),
            t.cols()
        )));
    }
    if n_max == 0 {
        return Err(WitnessError::Invalid("n_max must be at least 1".into()));
    }
    let k = match scaling {
        Scaling::Plain => 0usize,
        Scaling::Binomial { m } => {
            if mode == WitnessMode::Orbit {
                return Err(WitnessError::Invalid(
                    "binomial scaling reparametrizes λ and needs r-orbit mode".into(),
                ));
            }
            if m == 0 {
                return Err(WitnessError::Invalid("binomial scaling needs m >= 1".into()));
            }
            m - 1
        }
    };
    let mut out = Vec::with_capacity(samples.len());
    for (idx, x) in samples.iter().enumerate() {
        if x.len() != t.rows() {
            return Err(WitnessError::Invalid(format!(
                "sample {idx} has dimension {} for a {}x{} matrix",
                x.len(),
                t.rows(),
                t.cols()
            )));
        }
        let xn2 = x.iter().map(|a| a * a).sum::<f64>();
        if xn2 <= 0.0 || xn2.is_nan() {
            return Err(WitnessError::ZeroSample(idx));
        }
        let sx = s.matvec(x)?;
        let sx_norm = sx.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut y = x.clone();
        // ‖raw T^n x‖ = ‖y‖ · norm_acc after renormalizations.
        let mut norm_acc = 1.0f64;
        let mut binom = 1.0f64; // C(n, k), clamped below by 1
        let mut best = SampleResult {
            x: x.clone(),
            best_n: 0,
            best_lambda: if mode == WitnessMode::Orbit { 1.0 } else { 0.0 },
            residual: f64::INFINITY,
        };
        for n in 0..=n_max {
            if y.iter().any(|a| !a.is_finite()) {
                break;
            }
            let y2 = y.iter().map(|a| a * a).sum::<f64>();
            let (lambda_y, reported) = match mode {
                WitnessMode::Orbit => {
                    let div = binom.max(1.0);
                    (1.0 / div, 1.0 / div)
                }
                WitnessMode::ROrbit => {
                    if y2 > 0.0 {
                        let ip = y.iter().zip(&sx).map(|(a, b)| a * b).sum::<f64>();
                        let l = ip / y2;
                        (l, l / norm_acc)
                    } else {
                        (0.0, 0.0)
                    }
                }
            };
            let residual = y
                .iter()
                .zip(&sx)
                .map(|(a, b)| {
                    let d = lambda_y * a - b;
                    d * d
                })
                .sum::<f64>()
                .sqrt();
            if residual < best.residual {
                best.best_n = n;
                best.best_lambda = reported;
                best.residual = residual;
            }
            if n == n_max {
                break;
            }
            y = t.matvec(&y)?;
            if mode == WitnessMode::ROrbit {
                let yn2 = y.iter().map(|a| a * a).sum::<f64>();
                if yn2 > 1e280 {
                    let yn = yn2.sqrt();
                    for a in y.iter_mut() {
                        *a /= yn;
                    }
                    norm_acc *= yn;
                }
            }
            let next = n + 1;
            if next > k as u64 {
                binom *= next as f64 / (next - k as u64) as f64;
            } else if next == k as u64 {
                binom = 1.0;
            }
        }
        if !best.residual.is_finite() {
            // Nothing representable was found (overflow at n = 0 is
            // impossible for unit x, so this cannot happen; keep a
            // defensive fallback on the starting power).
            best.best_n = 0;
            best.residual = sx_norm;
        }
        out.push(best);
    }
    Ok(out)
}

/// Builds the construction matching a *no* verdict, verifies it, and
/// assembles the report. Errors with [`WitnessError::Reflexive`] on yes
/// verdicts and [`WitnessError::UnsupportedRule`] on rules that carry no
/// construction.
pub fn build_witness_report(
    structure: &JordanStructure,
    verdict: &Verdict,
    num_samples: usize,
    cfg: &Config,
) -> Result<WitnessReport, WitnessError> {
    if verdict.answer == Answer::Yes {
        return Err(WitnessError::Reflexive);
    }
    if num_samples == 0 {
        return Err(WitnessError::Invalid("need at least one sample".into()));
    }
    let r = structure.spectral_radius;
    let m = structure
        .blocks
        .iter()
        .filter(|b| at_radius(b, r))
        .map(|b| b.size)
        .max()
        .unwrap_or(0);
    let (s, mode, scaling) = match verdict.rule.as_str() {
        "lemma-hard-relation" => {
            let j = independent_index(verdict)?;
            (
                build_flip_witness_flat(structure, j)?,
                WitnessMode::Orbit,
                Scaling::Plain,
            )
        }
        "non-split-independent-angle" => {
            let j = independent_index(verdict)?;
            (
                build_flip_witness_jordan(structure, j)?,
                WitnessMode::ROrbit,
                Scaling::Binomial { m },
            )
        }
        "split-gap" => (
            build_split_gap_witness(structure)?,
            WitnessMode::ROrbit,
            Scaling::Binomial { m },
        ),
        other => return Err(WitnessError::UnsupportedRule(other.to_string())),
    };
    let t = realize_f64(structure);
    let commutator_norm = verify_noncommuting(&s, &t)?;
    let samples = unit_samples(t.rows(), num_samples, cfg.seed);
    let results = verify_pointwise_approx(&s, &t, &samples, mode, cfg.n_max, scaling)?;
    Ok(WitnessReport {
        mode,
        rule: verdict.rule.clone(),
        s_matrix: matrix_rows(&s),
        commutator_norm,
        scaling,
        samples: results,
        search_budget: cfg.n_max,
        seed: cfg.seed,
    })
}

fn independent_index(verdict: &Verdict) -> Result<usize, WitnessError> {
    verdict.evidence.independent_angle.ok_or_else(|| {
        WitnessError::Invalid("verdict does not record which angle is independent".into())
    })
}

fn matrix_rows(m: &MatF) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| *m.at(r, c)).collect())
        .collect()
}
