//! Request parsing: the JSON analysis document, the expression grammar
//! for exact angle values, and the scalar literals used by flags.
//!
//! Exactness survives parsing: integers and strings become rationals, a
//! dense matrix drops to the float tier only when an entry is written as
//! a JSON float, and declared irrationals ride along symbolically.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use orbitrefl::jordan::{BlockSpecEntry, BlockSpecKind, MatrixInput};
use orbitrefl::qspan::{
    builtin_symbol, parse_rational_literal, rational_to_f64, ExactReal, IrrationalBasis,
};
use orbitrefl::torus::Turn;
use orbitrefl::{Config, MatF, MatQ, Rational};

use crate::CliError;

/// Parsed input half of an analysis request.
pub enum ParsedInput {
    Matrix(MatrixInput),
    Blocks(Vec<BlockSpecEntry>),
}

/// Options block of the JSON request: every [`Config`] knob plus the
/// witness controls, all optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RequestOptions {
    #[serde(flatten)]
    pub config: Config,
    pub witness: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
}

pub struct AnalysisRequest {
    pub input: ParsedInput,
    pub options: RequestOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequest {
    #[serde(default)]
    matrix: Option<Vec<Vec<serde_json::Value>>>,
    #[serde(default)]
    blocks: Option<Vec<RawBlock>>,
    #[serde(default)]
    options: RequestOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    #[serde(default = "default_size")]
    size: usize,
    #[serde(default)]
    rot: Option<RawRotation>,
    #[serde(default)]
    split: Option<RawSplit>,
}

fn default_size() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRotation {
    r: String,
    turns: RawTurns,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    value: String,
}

/// Angle forms: an expression string ("1/3", "sqrt2", "sqrt2+1/2"), or a
/// coordinate object over a declared basis.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawTurns {
    Expr(String),
    Object {
        #[serde(default = "default_bits")]
        precision_bits: u32,
        basis: Vec<RawSymbol>,
        coords: Vec<String>,
    },
}

fn default_bits() -> u32 {
    Config::default().precision_bits
}

/// Basis entries: a builtin name ("1", "sqrt2", …) or a user symbol with
/// its decimal approximation.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawSymbol {
    Name(String),
    WithValue { name: String, decimal: String },
}

/// Parses the single JSON request document.
pub fn parse_request(text: &str) -> Result<AnalysisRequest, CliError> {
    let raw: RawRequest = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("bad request document: {e}")))?;
    let input = match (raw.matrix, raw.blocks) {
        (Some(m), None) => ParsedInput::Matrix(parse_matrix(m)?),
        (None, Some(b)) => ParsedInput::Blocks(parse_blocks(b)?),
        (Some(_), Some(_)) => {
            return Err(CliError::Parse(
                "request has both `matrix` and `blocks`; give exactly one".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Parse(
                "request needs a `matrix` or a `blocks` input".into(),
            ))
        }
    };
    Ok(AnalysisRequest {
        input,
        options: raw.options,
    })
}

/// Dense matrix: integers and strings parse exactly; any JSON float
/// demotes the whole matrix to the numeric tier.
fn parse_matrix(rows: Vec<Vec<serde_json::Value>>) -> Result<MatrixInput, CliError> {
    let mut has_float = false;
    for row in &rows {
        for v in row {
            match v {
                serde_json::Value::Number(n) => {
                    if n.as_i64().is_none() && n.as_u64().is_none() {
                        has_float = true;
                    }
                }
                serde_json::Value::String(_) => {}
                other => {
                    return Err(CliError::Parse(format!(
                        "matrix entries must be numbers or rational strings, got {other}"
                    )))
                }
            }
        }
    }
    if has_float {
        let data: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| row.iter().map(entry_to_f64).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let m = MatF::from_rows(data)
            .map_err(|e| CliError::Parse(format!("bad matrix shape: {e}")))?;
        Ok(MatrixInput::Numeric(m))
    } else {
        let data: Vec<Vec<Rational>> = rows
            .iter()
            .map(|row| row.iter().map(entry_to_rational).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let m = MatQ::from_rows(data)
            .map_err(|e| CliError::Parse(format!("bad matrix shape: {e}")))?;
        Ok(MatrixInput::Exact(m))
    }
}

fn entry_to_rational(v: &serde_json::Value) -> Result<Rational, CliError> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_integer(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(BigInt::from(u)))
            } else {
                Err(CliError::Parse(format!("unexpected float {n} in exact tier")))
            }
        }
        serde_json::Value::String(s) => {
            parse_rational_literal(s).map_err(|e| CliError::Parse(e.to_string()))
        }
        other => Err(CliError::Parse(format!("bad matrix entry {other}"))),
    }
}

fn entry_to_f64(v: &serde_json::Value) -> Result<f64, CliError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CliError::Parse(format!("unrepresentable number {n}"))),
        serde_json::Value::String(s) => parse_rational_literal(s)
            .map(|q| rational_to_f64(&q))
            .map_err(|e| CliError::Parse(e.to_string())),
        other => Err(CliError::Parse(format!("bad matrix entry {other}"))),
    }
}

fn parse_blocks(blocks: Vec<RawBlock>) -> Result<Vec<BlockSpecEntry>, CliError> {
    blocks
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let kind = match (b.rot, b.split) {
                (Some(rot), None) => BlockSpecKind::Rotation {
                    radius: parse_rational_literal(&rot.r)
                        .map_err(|e| CliError::Parse(format!("block {i}: {e}")))?,
                    angle_turns: parse_turns(rot.turns)
                        .map_err(|e| CliError::Parse(format!("block {i}: {e}")))?,
                },
                (None, Some(split)) => BlockSpecKind::Split {
                    value: parse_rational_literal(&split.value)
                        .map_err(|e| CliError::Parse(format!("block {i}: {e}")))?,
                },
                _ => {
                    return Err(CliError::Parse(format!(
                        "block {i} must have exactly one of `rot` or `split`"
                    )))
                }
            };
            Ok(BlockSpecEntry { size: b.size, kind })
        })
        .collect()
}

fn parse_turns(raw: RawTurns) -> Result<ExactReal, String> {
    match raw {
        RawTurns::Expr(s) => {
            let family = parse_exact_family(&[s], &BTreeMap::new(), default_bits())
                .map_err(|e| e.to_string())?;
            Ok(family.into_iter().next().expect("one expression"))
        }
        RawTurns::Object {
            precision_bits,
            basis,
            coords,
        } => {
            let mut symbols: Vec<(String, Rational, Option<String>)> = Vec::new();
            for sym in basis {
                match sym {
                    RawSymbol::Name(name) => {
                        let approx = if name == "1" {
                            Rational::one()
                        } else {
                            builtin_symbol(&name, precision_bits)
                                .ok_or_else(|| format!("unknown symbol `{name}`"))?
                        };
                        symbols.push((name, approx, None));
                    }
                    RawSymbol::WithValue { name, decimal } => {
                        let approx =
                            parse_rational_literal(&decimal).map_err(|e| e.to_string())?;
                        symbols.push((name, approx, Some(decimal)));
                    }
                }
            }
            let mut coords: Vec<Rational> = coords
                .iter()
                .map(|c| parse_rational_literal(c).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            if symbols.first().map(|(n, _, _)| n.as_str()) != Some("1") {
                symbols.insert(0, ("1".into(), Rational::one(), None));
                coords.insert(0, Rational::zero());
            }
            let basis = IrrationalBasis::new_with_sources(symbols, precision_bits)
                .map_err(|e| e.to_string())?;
            ExactReal::new(basis, coords).map_err(|e| e.to_string())
        }
    }
}

/// Custom symbol table from repeated `name=decimal` flags.
pub fn parse_symbol_table(
    defs: &[String],
) -> Result<BTreeMap<String, (Rational, String)>, CliError> {
    let mut table = BTreeMap::new();
    for def in defs {
        let (name, decimal) = def.split_once('=').ok_or_else(|| {
            CliError::Parse(format!("symbol `{def}` must have the form name=decimal"))
        })?;
        let name = name.trim();
        if !is_symbol_name(name) || name == "1" {
            return Err(CliError::Parse(format!("bad symbol name `{name}`")));
        }
        let value = parse_rational_literal(decimal.trim())
            .map_err(|e| CliError::Parse(e.to_string()))?;
        table.insert(name.to_string(), (value, decimal.trim().to_string()));
    }
    Ok(table)
}

fn is_symbol_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// One additive term of an exact expression: a rational coefficient and
/// an optional symbol it multiplies.
struct Term {
    coef: Rational,
    symbol: Option<String>,
}

/// Parses expressions like `1/3`, `sqrt2`, `sqrt2+1/2`, `3/2*log2_3-2`
/// into [`ExactReal`]s over one shared basis: `{1}` plus every symbol any
/// of the expressions mentions (builtins, or names from `customs`).
pub fn parse_exact_family(
    exprs: &[String],
    customs: &BTreeMap<String, (Rational, String)>,
    precision_bits: u32,
) -> Result<Vec<ExactReal>, CliError> {
    if exprs.is_empty() {
        return Err(CliError::Parse("no values given".into()));
    }
    let parsed: Vec<Vec<Term>> = exprs
        .iter()
        .map(|e| parse_terms(e))
        .collect::<Result<_, _>>()?;
    let mut names: Vec<String> = Vec::new();
    for terms in &parsed {
        for t in terms {
            if let Some(n) = &t.symbol {
                if !names.contains(n) {
                    names.push(n.clone());
                }
            }
        }
    }
    let mut symbols: Vec<(String, Rational, Option<String>)> =
        vec![("1".into(), Rational::one(), None)];
    for name in &names {
        if let Some((value, decimal)) = customs.get(name) {
            symbols.push((name.clone(), value.clone(), Some(decimal.clone())));
        } else if let Some(value) = builtin_symbol(name, precision_bits) {
            symbols.push((name.clone(), value, None));
        } else {
            return Err(CliError::Parse(format!(
                "unknown symbol `{name}`; declare it with --symbol {name}=<decimal>"
            )));
        }
    }
    let basis = IrrationalBasis::new_with_sources(symbols, precision_bits)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    parsed
        .into_iter()
        .map(|terms| {
            let mut coords = vec![Rational::zero(); names.len() + 1];
            for t in terms {
                let idx = match &t.symbol {
                    None => 0,
                    Some(n) => 1 + names.iter().position(|x| x == n).expect("collected"),
                };
                coords[idx] += t.coef;
            }
            ExactReal::new(Arc::clone(&basis), coords)
                .map_err(|e| CliError::Parse(e.to_string()))
        })
        .collect()
}

fn parse_terms(expr: &str) -> Result<Vec<Term>, CliError> {
    let bad = |msg: String| CliError::Parse(format!("in expression `{expr}`: {msg}"));
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad("empty expression".into()));
    }
    // Split on +/- signs that are not leading and not exponent signs.
    let chars: Vec<char> = s.chars().collect();
    let mut pieces: Vec<(i32, String)> = Vec::new();
    let mut sign = 1i32;
    let mut cur = String::new();
    let mut idx = 0usize;
    while idx < chars.len() {
        let c = chars[idx];
        let splits = (c == '+' || c == '-')
            && idx != 0
            && !cur.is_empty()
            && !matches!(chars[idx - 1], 'e' | 'E' | '*' | '/' | ':');
        if splits {
            pieces.push((sign, std::mem::take(&mut cur)));
            sign = if c == '-' { -1 } else { 1 };
        } else if c == '-' && cur.is_empty() && pieces.is_empty() && idx == 0 {
            sign = -sign;
        } else {
            cur.push(c);
        }
        idx += 1;
    }
    if cur.is_empty() {
        return Err(bad("trailing operator".into()));
    }
    pieces.push((sign, cur));
    pieces
        .into_iter()
        .map(|(sign, piece)| {
            let signed = |q: Rational| if sign < 0 { -q } else { q };
            if let Some((coef, name)) = piece.split_once('*') {
                if !is_symbol_name(name) {
                    return Err(bad(format!("bad symbol name `{name}`")));
                }
                let q = parse_rational_literal(coef).map_err(|e| bad(e.to_string()))?;
                Ok(Term {
                    coef: signed(q),
                    symbol: Some(name.to_string()),
                })
            } else if is_symbol_name(&piece) {
                Ok(Term {
                    coef: signed(Rational::one()),
                    symbol: Some(piece),
                })
            } else {
                let q = parse_rational_literal(&piece).map_err(|e| bad(e.to_string()))?;
                Ok(Term {
                    coef: signed(q),
                    symbol: None,
                })
            }
        })
        .collect()
}

/// Numeric value for --numeric flags: a float literal, or a symbol name
/// resolved from the builtin table / the custom table at high precision.
pub fn parse_numeric_value(
    s: &str,
    customs: &BTreeMap<String, (Rational, String)>,
) -> Result<f64, CliError> {
    if let Some((value, _)) = customs.get(s) {
        return Ok(rational_to_f64(value));
    }
    if is_symbol_name(s) {
        if let Some(value) = builtin_symbol(s, 256) {
            return Ok(rational_to_f64(&value));
        }
        return Err(CliError::Parse(format!(
            "unknown symbol `{s}`; declare it with --symbol {s}=<decimal>"
        )));
    }
    if let Ok(q) = parse_rational_literal(s) {
        return Ok(rational_to_f64(&q));
    }
    f64::from_str(s).map_err(|e| CliError::Parse(format!("bad numeric value `{s}`: {e}")))
}

/// Torus coordinate: `p/q` (or an integer, or a terminating decimal)
/// parses exactly; symbol names and other literals become floats.
pub fn parse_turn(s: &str) -> Result<Turn, CliError> {
    if let Ok(q) = parse_rational_literal(s) {
        if let (Some(num), Some(den)) = (q.numer().to_i64(), q.denom().to_i64()) {
            return Ok(Turn::Rational { num, den });
        }
        return Ok(Turn::Real(rational_to_f64(&q)));
    }
    if is_symbol_name(s) {
        if let Some(value) = builtin_symbol(s, 256) {
            return Ok(Turn::Real(rational_to_f64(&value)));
        }
        return Err(CliError::Parse(format!("unknown symbol `{s}`")));
    }
    f64::from_str(s)
        .map(Turn::Real)
        .map_err(|e| CliError::Parse(format!("bad turn value `{s}`: {e}")))
}

/// Comma-separated integer exponents.
pub fn parse_exponents(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|p| {
            i64::from_str(p.trim())
                .map_err(|e| CliError::Parse(format!("bad exponent `{p}`: {e}")))
        })
        .collect()
}

/// Comma-separated float targets.
pub fn parse_targets(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            parse_rational_literal(p)
                .map(|q| rational_to_f64(&q))
                .or_else(|_| f64::from_str(p).map_err(|e| format!("bad target `{p}`: {e}")))
                .map_err(CliError::Parse)
        })
        .collect()
}

/// `d:r` or `d,r` — search powers n with n ≡ r (mod d).
pub fn parse_modulus(s: &str) -> Result<(u64, u64), CliError> {
    let (d, r) = s
        .split_once([':', ','])
        .ok_or_else(|| CliError::Parse(format!("bad modulus `{s}`; expected d:r")))?;
    let parse = |p: &str| {
        u64::from_str(p.trim()).map_err(|e| CliError::Parse(format!("bad modulus `{s}`: {e}")))
    };
    Ok((parse(d)?, parse(r)?))
}
