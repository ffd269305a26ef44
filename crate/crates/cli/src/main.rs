//! `orbitrefl`: decide orbit / ℝ-orbit reflexivity of real matrices,
//! certify ℚ-linear angle relations, simulate torus orbits, and build
//! verified counterexample witnesses.
//!
//! Exit codes: 0 success; 2 parse error; 3 structure-extraction failure;
//! 4 misuse (a witness was requested for a reflexive input).

use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orbitrefl::classify::{classify_orbit_reflexive, classify_r_orbit_reflexive, Answer};
use orbitrefl::jordan::{extract_structure, structure_from_spec, JordanStructure};
use orbitrefl::qspan::{detect_relation_numeric, full_support_relation, RelationCertificate};
use orbitrefl::torus::{density_gap, find_power_approx, weyl_average, Monomial};
use orbitrefl::witness::build_witness_report;
use orbitrefl::Config;

use orbitrefl_cli::input::{
    parse_exact_family, parse_exponents, parse_modulus, parse_numeric_value, parse_request,
    parse_symbol_table, parse_targets, parse_turn, AnalysisRequest, ParsedInput, RequestOptions,
};
use orbitrefl_cli::{
    classify_error, jordan_error, provenance, render, torus_error, witness_error, AnalysisReport,
    CliError, PowerSearchReport, SimulateReport, Verdicts,
};

#[derive(Parser)]
#[command(
    name = "orbitrefl",
    version,
    about = "Orbit and R-orbit reflexivity analysis for real matrices"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Recover the Jordan structure and decide both reflexivity properties.
    Analyze(AnalyzeArgs),
    /// Detect a Q-linear relation among real values, exactly or heuristically.
    Relation(RelationArgs),
    /// Torus-orbit simulation: grid density, Weyl averages, power search.
    Simulate(SimulateArgs),
    /// Build and numerically verify a counterexample witness.
    Witness(WitnessArgs),
}

/// Config knobs available on every pipeline command; unset flags fall
/// back to the request document and then to the documented defaults.
#[derive(Args, Clone, Default)]
struct Knobs {
    /// Working precision in bits for relation detection.
    #[arg(long, alias = "bits")]
    precision_bits: Option<u32>,
    /// Float-tier clustering / rank tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Max coefficient height accepted in heuristic relations.
    #[arg(long, alias = "height")]
    height_bound: Option<u64>,
    /// Power-scan budget for witnesses and torus search.
    #[arg(long)]
    n_max: Option<u64>,
    /// Torus occupancy grid resolution per axis.
    #[arg(long)]
    grid: Option<u32>,
    /// RNG seed for sample vectors.
    #[arg(long)]
    seed: Option<u64>,
    /// Structure-extraction dimension bound.
    #[arg(long)]
    max_dim: Option<usize>,
}

impl Knobs {
    fn apply(&self, mut cfg: Config) -> Config {
        if let Some(v) = self.precision_bits {
            cfg.precision_bits = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.height_bound {
            cfg.height_bound = v;
        }
        if let Some(v) = self.n_max {
            cfg.n_max = v;
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.max_dim {
            cfg.max_dim = v;
        }
        cfg
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Path to the JSON request document, or `-` for stdin.
    input: String,
    /// Attach a verified witness when a property fails.
    #[arg(long)]
    witness: bool,
    /// Number of witness sample vectors.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Args)]
struct RelationArgs {
    /// Exact values in the expression grammar (e.g. `1:3`, `sqrt2+1/2`).
    #[arg(long = "exact", value_name = "EXPR", num_args = 1..)]
    exact: Vec<String>,
    /// Float values or symbol names for heuristic detection.
    #[arg(long = "numeric", value_name = "VALUE", num_args = 1.., conflicts_with = "exact")]
    numeric: Vec<String>,
    /// Custom symbol declaration `name=decimal` (repeatable).
    #[arg(long = "symbol", value_name = "NAME=DECIMAL")]
    symbols: Vec<String>,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Torus coordinates in turns: `p/q` exact or float/symbol (repeatable).
    #[arg(long = "alpha", value_name = "TURNS", num_args = 1..)]
    alphas: Vec<String>,
    /// Number of orbit points to scan.
    #[arg(long)]
    n: Option<u64>,
    /// Character monomial exponents, comma separated (repeatable).
    #[arg(long = "monomial", value_name = "M1,M2,...")]
    monomials: Vec<String>,
    /// Target point (turns, comma separated) for the power search.
    #[arg(long)]
    target: Option<String>,
    /// Torus-distance tolerance for the power search.
    #[arg(long)]
    search_tol: Option<f64>,
    /// Congruence constraint `d:r` — search n with n ≡ r (mod d).
    #[arg(long)]
    modulus: Option<String>,
    /// Skip the grid-density pass.
    #[arg(long)]
    no_density: bool,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Args)]
struct WitnessArgs {
    /// Path to the JSON request document, or `-` for stdin.
    input: String,
    /// Which property to witness the failure of.
    #[arg(long, value_enum, default_value_t = PropertyArg::Auto)]
    property: PropertyArg,
    /// Number of sample vectors.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Auto,
    Orbit,
    ROrbit,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Analyze(args) => cmd_analyze(args, cli.format),
        Cmd::Relation(args) => cmd_relation(args, cli.format),
        Cmd::Simulate(args) => cmd_simulate(args, cli.format),
        Cmd::Witness(args) => cmd_witness(args, cli.format),
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Parse(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("reading {path}: {e}")))
    }
}

fn load_request(path: &str, knobs: &Knobs) -> Result<(AnalysisRequest, Config), CliError> {
    let text = read_input(path)?;
    let request = parse_request(&text)?;
    let cfg = knobs.apply(request.options.config.clone());
    cfg.validate().map_err(CliError::Parse)?;
    Ok((request, cfg))
}

fn build_structure(input: &ParsedInput, cfg: &Config) -> Result<JordanStructure, CliError> {
    match input {
        ParsedInput::Matrix(m) => extract_structure(m, cfg).map_err(jordan_error),
        ParsedInput::Blocks(blocks) => structure_from_spec(blocks).map_err(jordan_error),
    }
}

fn classify_both(structure: &JordanStructure, cfg: &Config) -> Result<Verdicts, CliError> {
    Ok(Verdicts {
        orbit: classify_orbit_reflexive(structure, cfg).map_err(classify_error)?,
        r_orbit: classify_r_orbit_reflexive(structure, cfg).map_err(classify_error)?,
    })
}

fn collect_certificates(verdicts: &Verdicts) -> Vec<RelationCertificate> {
    verdicts
        .orbit
        .evidence
        .memberships
        .iter()
        .chain(verdicts.r_orbit.evidence.memberships.iter())
        .map(|m| m.relation.clone())
        .collect()
}

fn witness_samples(flag: &Option<usize>, options: &RequestOptions) -> usize {
    flag.or(options.samples).unwrap_or(8)
}

fn cmd_analyze(args: AnalyzeArgs, format: Format) -> Result<(), CliError> {
    let (request, cfg) = load_request(&args.input, &args.knobs)?;
    let structure = build_structure(&request.input, &cfg)?;
    let verdicts = classify_both(&structure, &cfg)?;
    let want_witness = args.witness || request.options.witness;
    let witness = if want_witness {
        let samples = witness_samples(&args.samples, &request.options);
        let failing = [&verdicts.orbit, &verdicts.r_orbit]
            .into_iter()
            .find(|v| v.answer == Answer::No);
        match failing {
            Some(v) => {
                Some(build_witness_report(&structure, v, samples, &cfg).map_err(witness_error)?)
            }
            None => None,
        }
    } else {
        None
    };
    let report = AnalysisReport {
        structure,
        certificates: collect_certificates(&verdicts),
        verdicts,
        witness,
        provenance: provenance(&cfg),
    };
    emit(&report, format, render::analysis_text)
}

fn cmd_relation(args: RelationArgs, format: Format) -> Result<(), CliError> {
    let cfg = args.knobs.apply(Config::default());
    cfg.validate().map_err(CliError::Parse)?;
    let customs = parse_symbol_table(&args.symbols)?;
    let certificate: RelationCertificate = if !args.exact.is_empty() {
        let family = parse_exact_family(&args.exact, &customs, cfg.precision_bits)?;
        full_support_relation(&family).map_err(|e| CliError::Parse(e.to_string()))?
    } else if !args.numeric.is_empty() {
        let values = args
            .numeric
            .iter()
            .map(|s| parse_numeric_value(s, &customs))
            .collect::<Result<Vec<_>, _>>()?;
        detect_relation_numeric(&values, cfg.height_bound, cfg.precision_bits)
            .map_err(|e| CliError::Parse(e.to_string()))?
    } else {
        return Err(CliError::Parse(
            "give at least one value with --exact or --numeric".into(),
        ));
    };
    emit(&certificate, format, render::relation_text)
}

fn cmd_simulate(args: SimulateArgs, format: Format) -> Result<(), CliError> {
    let cfg = args.knobs.apply(Config::default());
    cfg.validate().map_err(CliError::Parse)?;
    if args.alphas.is_empty() {
        return Err(CliError::Parse("give at least one --alpha".into()));
    }
    let alphas = args
        .alphas
        .iter()
        .map(|s| parse_turn(s))
        .collect::<Result<Vec<_>, _>>()?;
    let n = args.n.unwrap_or(cfg.n_max);
    let density = if args.no_density {
        None
    } else {
        Some(density_gap(&alphas, n, cfg.grid).map_err(torus_error)?)
    };
    let weyl = args
        .monomials
        .iter()
        .map(|m| {
            let exponents = parse_exponents(m)?;
            weyl_average(&alphas, &Monomial { exponents }, n).map_err(torus_error)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let power_search = match &args.target {
        None => None,
        Some(t) => {
            let target_turns = parse_targets(t)?;
            let tol = args.search_tol.unwrap_or(cfg.tol.max(1e-6));
            let modulus = args.modulus.as_deref().map(parse_modulus).transpose()?;
            let hit =
                find_power_approx(&alphas, &target_turns, tol, modulus, n).map_err(torus_error)?;
            Some(PowerSearchReport {
                target_turns,
                tol,
                n_max: n,
                modulus,
                hit,
            })
        }
    };
    let report = SimulateReport {
        density,
        weyl,
        power_search,
    };
    emit(&report, format, render::simulate_text)
}

fn cmd_witness(args: WitnessArgs, format: Format) -> Result<(), CliError> {
    let (request, cfg) = load_request(&args.input, &args.knobs)?;
    let structure = build_structure(&request.input, &cfg)?;
    let samples = witness_samples(&args.samples, &request.options);
    let property = match (args.property, request.options.property.as_deref()) {
        (PropertyArg::Auto, Some("orbit")) => PropertyArg::Orbit,
        (PropertyArg::Auto, Some("r-orbit")) | (PropertyArg::Auto, Some("r_orbit")) => {
            PropertyArg::ROrbit
        }
        (PropertyArg::Auto, Some(other)) => {
            return Err(CliError::Parse(format!(
                "unknown property `{other}`; use orbit or r-orbit"
            )))
        }
        (p, _) => p,
    };
    let verdict = match property {
        PropertyArg::Orbit => classify_orbit_reflexive(&structure, &cfg).map_err(classify_error)?,
        PropertyArg::ROrbit => {
            classify_r_orbit_reflexive(&structure, &cfg).map_err(classify_error)?
        }
        PropertyArg::Auto => {
            let verdicts = classify_both(&structure, &cfg)?;
            if verdicts.orbit.answer == Answer::No {
                verdicts.orbit
            } else if verdicts.r_orbit.answer == Answer::No {
                verdicts.r_orbit
            } else {
                return Err(CliError::Misuse(
                    "both properties hold for this input; nothing to witness".into(),
                ));
            }
        }
    };
    let report =
        build_witness_report(&structure, &verdict, samples, &cfg).map_err(witness_error)?;
    emit(&report, format, render::witness_text)
}

fn emit<T: Serialize>(
    value: &T,
    format: Format,
    text: impl Fn(&T) -> String,
) -> Result<(), CliError> {
    let out = match format {
        Format::Json => serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Internal(format!("serializing report: {e}")))?,
        Format::Text => text(value),
    };
    // A closed pipe (`orbitrefl … | head`) ends the conversation, not the
    // program's health: swallow it instead of panicking mid-print.
    match writeln!(std::io::stdout(), "{out}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(CliError::Internal(format!("writing report: {e}"))),
        Ok(()) => Ok(()),
    }
}
