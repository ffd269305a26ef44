//! Human-readable summaries for `--format text`.
//!
//! JSON is the machine interface; these renderings trade completeness for
//! a quick read, so each one leads with the verdict/outcome and keeps the
//! auditable detail (certificates, per-sample residuals) to one line each.

use std::fmt::Write;

use orbitrefl::classify::{Answer, Verdict};
use orbitrefl::jordan::{BlockKind, JordanBlock, JordanStructure, StructureSource};
use orbitrefl::qspan::{Certainty, RelationCertificate, RelationOutcome};
use orbitrefl::witness::{Scaling, WitnessMode, WitnessReport};

use crate::{AnalysisReport, SimulateReport};

fn block_text(b: &JordanBlock) -> String {
    match &b.kind {
        BlockKind::Split { value } => format!("J_{}({:.6})", b.size, value.to_f64()),
        BlockKind::Rotation { angle, .. } => format!(
            "J_{}({:.6}·R({:.9} turns))",
            b.size,
            b.radius_f64(),
            angle.to_f64()
        ),
    }
}

fn certainty_text(c: Certainty) -> &'static str {
    match c {
        Certainty::Exact => "exact",
        Certainty::Heuristic => "heuristic",
    }
}

fn verdict_line(label: &str, v: &Verdict) -> String {
    let answer = match v.answer {
        Answer::Yes => "yes",
        Answer::No => "no",
    };
    format!(
        "{label}: {answer} ({}, rule: {})",
        certainty_text(v.certainty),
        v.rule
    )
}

pub fn structure_text(s: &JordanStructure) -> String {
    let blocks: Vec<String> = s.blocks.iter().map(block_text).collect();
    let source = match s.source {
        StructureSource::Exact => "exact".to_string(),
        StructureSource::Numeric { tol } => format!("numeric, tol {tol:.1e}"),
    };
    format!(
        "structure: dim {} = {} (spectral radius {:.6}, {source})",
        s.dimension,
        blocks.join(" ⊕ "),
        s.spectral_radius
    )
}

pub fn relation_text(c: &RelationCertificate) -> String {
    let mut out = String::new();
    match &c.outcome {
        RelationOutcome::Found { s, t, residual } => {
            let terms: Vec<String> = s.iter().enumerate().map(|(j, k)| format!("{k}·a{j}")).collect();
            let _ = writeln!(out, "relation found: {} = {t}", terms.join(" + "));
            let _ = writeln!(out, "  residual: {residual:.3e}");
        }
        RelationOutcome::NoneUpToHeight => {
            let _ = writeln!(out, "no relation found");
        }
    }
    let _ = write!(out, "  certainty: {}", certainty_text(c.certainty));
    if let Some(h) = c.height_bound {
        let _ = write!(out, ", height bound {h}");
    }
    if let Some(b) = c.precision_bits {
        let _ = write!(out, ", {b} bits");
    }
    out
}

pub fn analysis_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", structure_text(&r.structure));
    let _ = writeln!(out, "{}", verdict_line("orbit reflexive", &r.verdicts.orbit));
    let _ = writeln!(
        out,
        "{}",
        verdict_line("R-orbit reflexive", &r.verdicts.r_orbit)
    );
    for v in [&r.verdicts.orbit, &r.verdicts.r_orbit] {
        if let Some(note) = &v.evidence.note {
            let _ = writeln!(out, "  note: {note}");
        }
    }
    if !r.certificates.is_empty() {
        let _ = writeln!(out, "certificates:");
        for c in &r.certificates {
            for line in relation_text(c).lines() {
                let _ = writeln!(out, "  {line}");
            }
        }
    }
    if let Some(w) = &r.witness {
        let _ = writeln!(out, "witness:");
        for line in witness_text(w).lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    let _ = write!(
        out,
        "({} v{})",
        r.provenance.tool, r.provenance.version
    );
    out
}

pub fn witness_text(w: &WitnessReport) -> String {
    let mut out = String::new();
    let mode = match w.mode {
        WitnessMode::Orbit => "orbit",
        WitnessMode::ROrbit => "R-orbit",
    };
    let scaling = match w.scaling {
        Scaling::Plain => "plain".to_string(),
        Scaling::Binomial { m } => format!("binomial, m = {m}"),
    };
    let _ = writeln!(
        out,
        "witness against {mode} reflexivity (rule: {}, scaling: {scaling})",
        w.rule
    );
    let _ = writeln!(
        out,
        "  commutator norm ‖ST−TS‖ = {:.6} (must be > 0)",
        w.commutator_norm
    );
    let _ = writeln!(
        out,
        "  {} samples, budget n ≤ {}, seed {}",
        w.samples.len(),
        w.search_budget,
        w.seed
    );
    let worst = w
        .samples
        .iter()
        .map(|s| s.residual)
        .fold(f64::NEG_INFINITY, f64::max);
    for s in &w.samples {
        let _ = writeln!(
            out,
            "  residual {:.3e} at n = {} (λ = {:.3e})",
            s.residual, s.best_n, s.best_lambda
        );
    }
    let _ = write!(out, "  worst residual: {worst:.3e}");
    out
}

pub fn simulate_text(r: &SimulateReport) -> String {
    let mut out = String::new();
    if let Some(d) = &r.density {
        let _ = writeln!(
            out,
            "density: {}/{} cells occupied on a {}^{} grid after {} steps",
            d.occupied_cells, d.total_cells, d.grid, d.k, d.n
        );
        let _ = writeln!(
            out,
            "  empty fraction {:.6}, covering radius ≤ {:.6}",
            d.empty_fraction, d.covering_radius
        );
    }
    for w in &r.weyl {
        let _ = writeln!(
            out,
            "weyl average over {} points: |avg| = {:.6e} (β = {:.9} turns{})",
            w.n,
            w.magnitude,
            w.beta_turns,
            match w.bound {
                Some(b) => format!(", bound {b:.6e}"),
                None => ", integral pairing".to_string(),
            }
        );
    }
    if let Some(p) = &r.power_search {
        match &p.hit {
            Some(hit) => {
                let _ = writeln!(
                    out,
                    "power search: n = {} reaches the target within {:.3e} (max coord distance {:.3e})",
                    hit.n, p.tol, hit.max_dist
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "power search: no n ≤ {} within tolerance {:.3e}",
                    p.n_max, p.tol
                );
            }
        }
    }
    if out.is_empty() {
        out.push_str("nothing to report (density disabled, no monomials, no target)");
    }
    while out.ends_with('\n') {
        out.pop();
    }
    out
}
