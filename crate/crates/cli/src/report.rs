//! Renderings of classification reports: a human table and a
//! machine-readable key/value document that parses back losslessly.
//!
//! The machine format is line-oriented: `key: value`, split at the first
//! `": "`, with a fixed key order.  Witnesses keep their structure through
//! sub-keys (`sound.witness.model`, `weighted-sound.witness.high`, ...),
//! so a verdict never has to be scraped out of prose.  [`parse_report`]
//! inverts [`render_machine`] exactly, which the golden tests pin down.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use coarsen::checker::{AbstractionClass, AbstractionReport, Verdict, Witness};
use coarsen::Value;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// The version tag the machine format opens with.
pub const REPORT_FORMAT: &str = "abstraction-report/1";

/// A verdict as the machine format carries it: witnesses and
/// probabilities are kept as their rendered text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineVerdict {
    Holds,
    Fails(MachineWitness),
    Skipped(String),
}

/// A witness as the machine format carries it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MachineWitness {
    LowModel(String),
    HighModel(String),
    ModelProbability { model: String, high: String, low: String },
    Literal { literal: String, high: String, low: String },
}

/// A classification report in machine form: six class verdicts in
/// canonical order plus the two run flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineReport {
    pub classes: Vec<(String, MachineVerdict)>,
    pub separable: bool,
    pub fast_path: bool,
}

/// The machine key for a class: its display name, kebab-cased.
pub fn class_key(class: AbstractionClass) -> String {
    class.to_string().replace(' ', "-")
}

impl MachineReport {
    pub fn from_report(report: &AbstractionReport) -> Self {
        let classes = AbstractionClass::ALL
            .iter()
            .map(|&class| (class_key(class), machine_verdict(report.verdict(class))))
            .collect();
        MachineReport { classes, separable: report.separable, fast_path: report.fast_path_used }
    }
}

fn machine_verdict(verdict: &Verdict) -> MachineVerdict {
    match verdict {
        Verdict::Holds => MachineVerdict::Holds,
        Verdict::Fails(witness) => MachineVerdict::Fails(machine_witness(witness)),
        Verdict::Skipped(reason) => MachineVerdict::Skipped(reason.clone()),
    }
}

fn machine_witness(witness: &Witness) -> MachineWitness {
    match witness {
        Witness::LowModel(model) => MachineWitness::LowModel(model.model_formula().to_string()),
        Witness::HighModel(model) => MachineWitness::HighModel(model.model_formula().to_string()),
        Witness::ModelProbability { model, high, low } => MachineWitness::ModelProbability {
            model: model.model_formula().to_string(),
            high: high.to_string(),
            low: low.to_string(),
        },
        Witness::Literal { literal, high, low } => MachineWitness::Literal {
            literal: literal.to_string(),
            high: high.to_string(),
            low: low.to_string(),
        },
    }
}

/// Renders the machine document.
pub fn render_machine(report: &MachineReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format: {REPORT_FORMAT}");
    for (key, verdict) in &report.classes {
        match verdict {
            MachineVerdict::Holds => {
                let _ = writeln!(out, "{key}: holds");
            }
            MachineVerdict::Fails(witness) => {
                let _ = writeln!(out, "{key}: fails");
                match witness {
                    MachineWitness::LowModel(model) => {
                        let _ = writeln!(out, "{key}.witness: low-model");
                        let _ = writeln!(out, "{key}.witness.model: {model}");
                    }
                    MachineWitness::HighModel(model) => {
                        let _ = writeln!(out, "{key}.witness: high-model");
                        let _ = writeln!(out, "{key}.witness.model: {model}");
                    }
                    MachineWitness::ModelProbability { model, high, low } => {
                        let _ = writeln!(out, "{key}.witness: model-probability");
                        let _ = writeln!(out, "{key}.witness.model: {model}");
                        let _ = writeln!(out, "{key}.witness.high: {high}");
                        let _ = writeln!(out, "{key}.witness.low: {low}");
                    }
                    MachineWitness::Literal { literal, high, low } => {
                        let _ = writeln!(out, "{key}.witness: literal");
                        let _ = writeln!(out, "{key}.witness.literal: {literal}");
                        let _ = writeln!(out, "{key}.witness.high: {high}");
                        let _ = writeln!(out, "{key}.witness.low: {low}");
                    }
                }
            }
            MachineVerdict::Skipped(reason) => {
                let _ = writeln!(out, "{key}: skipped");
                let _ = writeln!(out, "{key}.reason: {reason}");
            }
        }
    }
    let _ = writeln!(out, "separable: {}", report.separable);
    let _ = writeln!(out, "fast-path: {}", report.fast_path);
    out
}

/// Failures while reading a machine document back.
#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing key `{0}`")]
    Missing(String),
}

fn malformed(line: usize, msg: impl Into<String>) -> ReportError {
    ReportError::Malformed { line, msg: msg.into() }
}

/// Parses a machine document back into a [`MachineReport`].
///
/// Inverse of [`render_machine`]: parsing a rendered report yields an
/// equal value.  Keys may arrive in any order; values are everything
/// after the first `": "`, so witness text and skip reasons survive even
/// when they contain colons themselves.
pub fn parse_report(text: &str) -> Result<MachineReport, ReportError> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (key, value) = raw
            .split_once(": ")
            .ok_or_else(|| malformed(line, "expected `key: value`"))?;
        if fields.insert(key.to_string(), value.to_string()).is_some() {
            return Err(malformed(line, format!("duplicate key `{key}`")));
        }
    }

    let take = |fields: &mut BTreeMap<String, String>, key: &str| -> Result<String, ReportError> {
        fields.remove(key).ok_or_else(|| ReportError::Missing(key.to_string()))
    };

    let format = take(&mut fields, "format")?;
    if format != REPORT_FORMAT {
        return Err(malformed(1, format!("unknown format `{format}`")));
    }

    let mut classes = Vec::with_capacity(AbstractionClass::ALL.len());
    for &class in &AbstractionClass::ALL {
        let key = class_key(class);
        let verdict = match take(&mut fields, &key)?.as_str() {
            "holds" => MachineVerdict::Holds,
            "skipped" => MachineVerdict::Skipped(take(&mut fields, &format!("{key}.reason"))?),
            "fails" => {
                let kind = take(&mut fields, &format!("{key}.witness"))?;
                let witness = match kind.as_str() {
                    "low-model" => {
                        MachineWitness::LowModel(take(&mut fields, &format!("{key}.witness.model"))?)
                    }
                    "high-model" => MachineWitness::HighModel(take(
                        &mut fields,
                        &format!("{key}.witness.model"),
                    )?),
                    "model-probability" => MachineWitness::ModelProbability {
                        model: take(&mut fields, &format!("{key}.witness.model"))?,
                        high: take(&mut fields, &format!("{key}.witness.high"))?,
                        low: take(&mut fields, &format!("{key}.witness.low"))?,
                    },
                    "literal" => MachineWitness::Literal {
                        literal: take(&mut fields, &format!("{key}.witness.literal"))?,
                        high: take(&mut fields, &format!("{key}.witness.high"))?,
                        low: take(&mut fields, &format!("{key}.witness.low"))?,
                    },
                    other => {
                        return Err(ReportError::Missing(format!(
                            "{key}.witness kind `{other}` is unknown"
                        )))
                    }
                };
                MachineVerdict::Fails(witness)
            }
            other => {
                return Err(ReportError::Missing(format!(
                    "verdict `{other}` for `{key}` is unknown"
                )))
            }
        };
        classes.push((key, verdict));
    }

    let separable = parse_bool(&take(&mut fields, "separable")?)?;
    let fast_path = parse_bool(&take(&mut fields, "fast-path")?)?;

    if let Some((key, _)) = fields.into_iter().next() {
        return Err(ReportError::Missing(format!("unexpected key `{key}`")));
    }
    Ok(MachineReport { classes, separable, fast_path })
}

fn parse_bool(text: &str) -> Result<bool, ReportError> {
    match text {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ReportError::Missing(format!("expected a boolean, found `{other}`"))),
    }
}

/// Renders the human table.
pub fn render_table(report: &AbstractionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<18} {:<8} detail", "class", "verdict");
    for &class in &AbstractionClass::ALL {
        let verdict = report.verdict(class);
        let (word, detail) = match verdict {
            Verdict::Holds => ("holds", String::new()),
            Verdict::Fails(witness) => ("fails", witness.to_string()),
            Verdict::Skipped(reason) => ("skipped", reason.clone()),
        };
        let line = format!("{:<18} {:<8} {}", class.to_string(), word, detail);
        let _ = writeln!(out, "{}", line.trim_end());
    }
    let _ = writeln!(out, "{:<18} {}", "separable", report.separable);
    let _ = writeln!(out, "{:<18} {}", "fast path", report.fast_path_used);
    out
}

/// Renders a value for output: rationals keep their exact form, with a
/// decimal reading alongside — exact where the denominator allows one,
/// approximate (marked `~`) otherwise.  Floats print as they are.
pub fn render_value(value: &Value) -> String {
    match value {
        Value::Float(_) => value.to_string(),
        Value::Rational(r) => {
            if r.denom().is_one() {
                return r.numer().to_string();
            }
            match exact_decimal(r.numer(), r.denom()) {
                Some(decimal) => format!("{value} ({decimal})"),
                None => format!("{value} (~{:.6})", value.to_f64()),
            }
        }
    }
}

/// The exact decimal expansion of `numer/denom`, when the reduced
/// denominator divides a power of ten.
fn exact_decimal(numer: &BigInt, denom: &BigInt) -> Option<String> {
    let mut rest = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return None;
    }
    let places = twos.max(fives) as usize;
    let mut scale = BigInt::one();
    for _ in 0..places {
        scale *= 10;
    }
    let scaled = numer * &scale / denom;
    let sign = if scaled.is_negative() { "-" } else { "" };
    let digits = scaled.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let split = padded.len() - places;
    Some(format!("{sign}{}.{}", &padded[..split], &padded[split..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_render_with_decimal_readings() {
        assert_eq!(render_value(&Value::ratio(1, 4)), "1/4 (0.25)");
        assert_eq!(render_value(&Value::ratio(7, 10)), "7/10 (0.7)");
        assert_eq!(render_value(&Value::ratio(19, 1)), "19");
        assert_eq!(render_value(&Value::ratio(13, 38)), "13/38 (~0.342105)");
        assert_eq!(render_value(&Value::zero()), "0");
        assert_eq!(render_value(&Value::one()), "1");
        assert_eq!(render_value(&Value::Float(0.25)), "0.25");
    }

    #[test]
    fn long_decimal_expansions_stay_exact() {
        // 1/64 needs six places; 1/3 has none.
        assert_eq!(render_value(&Value::ratio(1, 64)), "1/64 (0.015625)");
        assert_eq!(render_value(&Value::ratio(1, 3)), "1/3 (~0.333333)");
        assert_eq!(render_value(&Value::ratio(1, 1024)), "1/1024 (0.0009765625)");
    }
}
