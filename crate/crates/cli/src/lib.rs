//! Report types, request parsing and rendering for the `orbitrefl` binary.
//!
//! The binary is a thin clap wrapper; everything serializable lives here so
//! downstream tooling (and the round-trip tests) can parse emitted reports
//! back into the exact structures that produced them.

pub mod input;
pub mod render;

use serde::{Deserialize, Serialize};

use orbitrefl::classify::{ClassifyError, Verdict};
use orbitrefl::jordan::{JordanError, JordanStructure};
use orbitrefl::qspan::RelationCertificate;
use orbitrefl::torus::{DensityReport, PowerHit, TorusError, WeylAverage};
use orbitrefl::witness::{WitnessError, WitnessReport};
use orbitrefl::Config;

/// Errors carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input (exit 2).
    Parse(String),
    /// Structure extraction failed (exit 3).
    Extraction(String),
    /// Semantically valid request that cannot be served (exit 4).
    Misuse(String),
    /// Anything else (exit 1).
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Extraction(m) => write!(f, "extraction failed: {m}"),
            CliError::Misuse(m) => write!(f, "{m}"),
            CliError::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Extraction(_) => 3,
            CliError::Misuse(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

pub fn jordan_error(e: JordanError) -> CliError {
    match e {
        JordanError::EmptyMatrix
        | JordanError::TooLarge { .. }
        | JordanError::NonFinite
        | JordanError::ExactInputRequired
        | JordanError::BadBlockSpec(_)
        | JordanError::Invalid(_) => CliError::Parse(e.to_string()),
        other => CliError::Extraction(other.to_string()),
    }
}

pub fn classify_error(e: ClassifyError) -> CliError {
    CliError::Extraction(e.to_string())
}

pub fn witness_error(e: WitnessError) -> CliError {
    match e {
        WitnessError::Reflexive => CliError::Misuse(
            "the requested property holds; a witness would be vacuous".into(),
        ),
        WitnessError::UnsupportedRule(r) => {
            CliError::Internal(format!("no witness construction for rule `{r}`"))
        }
        other => CliError::Parse(other.to_string()),
    }
}

pub fn torus_error(e: TorusError) -> CliError {
    CliError::Parse(e.to_string())
}

/// Both verdicts side by side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdicts {
    pub orbit: Verdict,
    pub r_orbit: Verdict,
}

/// Where the report came from and under which assumptions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub options: Config,
    pub assumptions: Vec<String>,
}

/// Full analysis output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub structure: JordanStructure,
    pub verdicts: Verdicts,
    /// Every relation certificate referenced by the verdict evidence.
    pub certificates: Vec<RelationCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    pub provenance: Provenance,
}

/// Torus simulation output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weyl: Vec<WeylAverage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_search: Option<PowerSearchReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerSearchReport {
    pub target_turns: Vec<f64>,
    pub tol: f64,
    pub n_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<(u64, u64)>,
    /// None when no admissible power exists within the budget.
    pub hit: Option<PowerHit>,
}

pub fn assumptions() -> Vec<String> {
    vec![
        "declared irrational symbols are Q-linearly independent together with 1".into(),
        "heuristic certificates only exclude relations up to the configured \
         coefficient height and precision"
            .into(),
    ]
}

pub fn provenance(cfg: &Config) -> Provenance {
    Provenance {
        tool: "orbitrefl".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        options: cfg.clone(),
        assumptions: assumptions(),
    }
}
