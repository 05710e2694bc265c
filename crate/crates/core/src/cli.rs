//! Batch front end over scenario files.
//!
//! Exit codes: 0 when everything passes, 1 when a check or invariant fails,
//! 2 for malformed input, unresolved names and mismatched models.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::cone::ConeVector;
use crate::error::Error;
use crate::feasibility::{verify_certificate, Feasibility};
use crate::holevo::{commutant, is_pure_representable};
use crate::instruments::{compose_instruments, condition_observable, sequential_product_observables, BiInstrument};
use crate::observables::{
    effects_coexist, joint_observable_problem, observables_coexist, verify_joint, BiObservable, Coexistence, Observable,
    Verdict,
};
use crate::operations::{is_effect_repeatable, Operation, MEASURE_TOL_FACTOR};
use crate::scenario::{self, Check, LoadError, Lookup, Scenario};
use crate::states::Functional;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "effect-algebra", version, about = "Effect algebras, instruments and coexistence over ordered spaces")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Override the tolerance of every model in the scenario.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load a scenario, check every object and run its check directives.
    Validate { file: PathBuf },
    /// Decide coexistence of two observables (or two effects).
    Coexist {
        file: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Write the joint observable, when one is found, to this file.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Decide whether an effect is repeatable, optionally through a given operation.
    Repeatable {
        file: PathBuf,
        #[arg(long)]
        effect: String,
        #[arg(long)]
        op: Option<String>,
    },
    /// The sequential product bi-observable A[I]B.
    Seqprod {
        file: PathBuf,
        #[arg(long)]
        obs: String,
        #[arg(long)]
        instr: String,
        #[arg(long)]
        then: String,
    },
    /// The conditioned observable (B | [I]A).
    Condition {
        file: PathBuf,
        #[arg(long)]
        obs: String,
        #[arg(long)]
        instr: String,
        #[arg(long)]
        then: String,
    },
    /// The commutant [a,b]_α.
    Commutant {
        file: PathBuf,
        #[arg(long)]
        state: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// The composed bi-instrument I∘J.
    Compose {
        file: PathBuf,
        #[arg(long)]
        i: String,
        #[arg(long)]
        j: String,
    },
}

/// A command failure carrying its exit code.
#[derive(Debug)]
struct Abort {
    code: i32,
    message: String,
}

impl From<LoadError> for Abort {
    fn from(e: LoadError) -> Self {
        Abort { code: EXIT_INPUT, message: e.to_string() }
    }
}

impl From<Error> for Abort {
    fn from(e: Error) -> Self {
        Abort { code: EXIT_INPUT, message: e.to_string() }
    }
}

impl From<Lookup> for Abort {
    fn from(l: Lookup) -> Self {
        match l {
            Lookup::Missing(e) => e.into(),
            Lookup::Invalid(v) => Abort { code: EXIT_FAIL, message: format!("{} `{}` is invalid: {}", v.kind, v.name, v.message) },
        }
    }
}

struct Report {
    value: Value,
    code: i32,
}

/// Runs the CLI on the given arguments (program name first), writing to
/// stdout/stderr, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`main_with_args`] with explicit output streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            let text = match cli.format {
                Format::Json => to_json(&report.value),
                Format::Text => to_text(&report.value),
            };
            let _ = out.write_all(text.as_bytes());
            report.code
        }
        Err(a) => {
            let _ = writeln!(err, "error: {}", a.message);
            a.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Report, Abort> {
    let load = |file: &Path| scenario::load(file, cli.tol);
    match &cli.command {
        Command::Validate { file } => cmd_validate(&load(file)?, file),
        Command::Coexist { file, a, b, witness_out } => cmd_coexist(&load(file)?, a, b, witness_out.as_deref()),
        Command::Repeatable { file, effect, op } => cmd_repeatable(&load(file)?, effect, op.as_deref()),
        Command::Seqprod { file, obs, instr, then } => cmd_seqprod(&load(file)?, obs, instr, then),
        Command::Condition { file, obs, instr, then } => cmd_condition(&load(file)?, obs, instr, then),
        Command::Commutant { file, state, a, b } => cmd_commutant(&load(file)?, state, a, b),
        Command::Compose { file, i, j } => cmd_compose(&load(file)?, i, j),
    }
}

// ----- commands -----

fn cmd_validate(sc: &Scenario, file: &Path) -> Result<Report, Abort> {
    let violations: Vec<Value> = sc
        .violations
        .iter()
        .map(|v| json!({ "kind": v.kind, "name": v.name, "message": v.message }))
        .collect();
    let mut checks = Vec::new();
    for c in &sc.checks {
        checks.push(run_check(sc, c)?);
    }
    let failed_checks = checks.iter().filter(|c| c["pass"] == Value::Bool(false)).count();
    let pass = violations.is_empty() && failed_checks == 0;
    let summary = if pass {
        format!("PASS: {} objects, {} checks", sc.object_count(), checks.len())
    } else {
        format!("FAIL: {} violations, {} of {} checks failed", violations.len(), failed_checks, checks.len())
    };
    let value = json!({
        "command": "validate",
        "file": file.display().to_string(),
        "summary": summary,
        "status": if pass { "PASS" } else { "FAIL" },
        "objects": sc.object_count(),
        "violations": violations,
        "checks": checks,
    });
    Ok(Report { value, code: if pass { EXIT_PASS } else { EXIT_FAIL } })
}

fn run_check(sc: &Scenario, check: &Check) -> Result<Value, Abort> {
    // a check on an invalid object fails rather than aborting the run
    let soft = |r: Result<Value, Abort>, desc: String| -> Result<Value, Abort> {
        match r {
            Err(a) if a.code == EXIT_FAIL => Ok(json!({ "check": desc, "pass": false, "detail": a.message })),
            other => other,
        }
    };
    match check {
        Check::Coexist { a, b, expect } => {
            let desc = format!("coexist {a} {b}");
            let r = coexist_verdict(sc, a, b).map(|(verdict, _)| {
                json!({ "check": desc, "expected": expect.to_string(), "actual": verdict.to_string(), "pass": verdict == *expect })
            });
            soft(r, desc)
        }
        Check::Repeatable { effect, operation, expect } => {
            let desc = match operation {
                Some(op) => format!("repeatable {effect} via {op}"),
                None => format!("repeatable {effect}"),
            };
            let r = (|| {
                let e = sc.effect(effect)?;
                let (actual, consistent) = match operation {
                    Some(op) => {
                        let conds = sc.operation(op)?.repeatability_conditions(e)?;
                        (conds.repeatable, conds.consistent())
                    }
                    None => (is_effect_repeatable(e)?.repeatable, true),
                };
                Ok(json!({
                    "check": desc, "expected": expect, "actual": actual,
                    "conditions_consistent": consistent, "pass": actual == *expect && consistent,
                }))
            })();
            soft(r, desc)
        }
        Check::Channel { operation, expect } => {
            let desc = format!("channel {operation}");
            let r = sc.operation(operation).map_err(Abort::from).map(|op| {
                let actual = op.is_channel();
                json!({ "check": desc, "expected": expect, "actual": actual, "pass": actual == *expect })
            });
            soft(r, desc)
        }
        Check::Pure { operation, expect } => {
            let desc = format!("pure {operation}");
            let r = (|| {
                let actual = is_pure_representable(sc.operation(operation)?)?.is_pure();
                Ok(json!({ "check": desc, "expected": expect, "actual": actual, "pass": actual == *expect }))
            })();
            soft(r, desc)
        }
        Check::Measures { instrument, observable } => {
            let desc = format!("{instrument} measures {observable}");
            let r = (|| {
                let i = sc.instrument(instrument)?;
                let a = sc.observable(observable)?;
                let tol = MEASURE_TOL_FACTOR * a.model().tol();
                let pass = i.measured_observable().approx_eq(a, tol);
                Ok(json!({ "check": desc, "pass": pass }))
            })();
            soft(r, desc)
        }
    }
}

enum Pair<'a> {
    Observables(&'a Observable, &'a Observable),
    Effects(&'a crate::cone::Effect, &'a crate::cone::Effect),
}

fn resolve_pair<'a>(sc: &'a Scenario, a: &str, b: &str) -> Result<Pair<'a>, Abort> {
    match (sc.observable(a), sc.observable(b)) {
        (Ok(x), Ok(y)) => Ok(Pair::Observables(x, y)),
        (Err(Lookup::Missing(_)), Err(Lookup::Missing(_))) => Ok(Pair::Effects(sc.effect(a)?, sc.effect(b)?)),
        (x, y) => Ok(Pair::Observables(x?, y?)),
    }
}

fn coexist_verdict(sc: &Scenario, a: &str, b: &str) -> Result<(Verdict, Value), Abort> {
    Ok(match resolve_pair(sc, a, b)? {
        Pair::Observables(x, y) => {
            let result = observables_coexist(x, y)?;
            let detail = match &result {
                Coexistence::Compatible(c) => json!({
                    "witness": bi_observable_json(c),
                    "witness_verified": verify_joint(x, y, c),
                }),
                Coexistence::Incompatible(cert) => {
                    let verified = verify_certificate(&joint_observable_problem(x, y)?, &Feasibility::Infeasible(cert.clone()));
                    json!({ "certificate": certificate_json(cert), "certificate_verified": verified })
                }
                Coexistence::Undecided(why) => json!({ "reason": why }),
            };
            (result.verdict(), detail)
        }
        Pair::Effects(x, y) => {
            let result = effects_coexist(x, y)?;
            let detail = match &result {
                Coexistence::Compatible(w) => json!({
                    "witness": {
                        "observable": observable_json(&w.observable),
                        "first": w.first,
                        "second": w.second,
                    }
                }),
                Coexistence::Incompatible(cert) => json!({ "certificate": certificate_json(cert) }),
                Coexistence::Undecided(why) => json!({ "reason": why }),
            };
            (result.verdict(), detail)
        }
    })
}

fn cmd_coexist(sc: &Scenario, a: &str, b: &str, witness_out: Option<&Path>) -> Result<Report, Abort> {
    let (verdict, detail) = coexist_verdict(sc, a, b)?;
    let mut value = json!({
        "command": "coexist",
        "a": a,
        "b": b,
        "verdict": verdict.to_string(),
        "summary": format!("{verdict}: {a} and {b}"),
    });
    merge(&mut value, detail);
    if let Some(path) = witness_out {
        if let Some(w) = value.get("witness") {
            std::fs::write(path, to_json(w))
                .map_err(|e| Abort { code: EXIT_INPUT, message: format!("cannot write {}: {e}", path.display()) })?;
            value["witness_file"] = json!(path.display().to_string());
        }
    }
    Ok(Report { value, code: EXIT_PASS })
}

fn cmd_repeatable(sc: &Scenario, effect: &str, op: Option<&str>) -> Result<Report, Abort> {
    let a = sc.effect(effect)?;
    let rep = is_effect_repeatable(a)?;
    let verdict = if rep.repeatable { "REPEATABLE" } else { "NOT_REPEATABLE" };
    let mut value = json!({
        "command": "repeatable",
        "effect": effect,
        "vector": vector_json(a.vector()),
        "verdict": verdict,
        "max_probability": rep.max_probability,
        "summary": format!("{verdict}: {effect}"),
    });
    if let Some((state, witness)) = &rep.witness {
        value["witness"] = json!({
            "state": vector_json(state.covector()),
            "operation": operation_json(witness),
            "repeats": witness.is_repeatable_via(a)?,
        });
    }
    if let Some(name) = op {
        let conds = sc.operation(name)?.repeatability_conditions(a)?;
        value["operation"] = json!(name);
        value["conditions"] = json!({
            "repeatable": conds.repeatable,
            "idempotent": conds.idempotent,
            "annihilates_complement": conds.annihilates_complement,
            "annihilates_orthogonal": conds.annihilates_orthogonal,
            "dominated": conds.dominated,
            "stable_probability": conds.stable_probability,
            "consistent": conds.consistent(),
        });
    }
    Ok(Report { value, code: EXIT_PASS })
}

fn cmd_seqprod(sc: &Scenario, obs: &str, instr: &str, then: &str) -> Result<Report, Abort> {
    let a = sc.observable(obs)?;
    let i = sc.instrument(instr)?;
    let b = sc.observable(then)?;
    let grid = sequential_product_observables(a, i, b)?;
    let (first, second) = grid.marginals();
    let value = json!({
        "command": "seqprod",
        "formula": "(A[I]B)(x,y) = I_x*(B_y)",
        "summary": format!("{obs}[{instr}]{then}: {}x{} grid", grid.rows().len(), grid.cols().len()),
        "grid": bi_observable_json(&grid),
        "first_marginal": observable_json(&first),
        "second_marginal": observable_json(&second),
        "first_marginal_is_measured": first.approx_eq(&i.measured_observable(), MEASURE_TOL_FACTOR * a.model().tol()),
    });
    Ok(Report { value, code: EXIT_PASS })
}

fn cmd_condition(sc: &Scenario, obs: &str, instr: &str, then: &str) -> Result<Report, Abort> {
    let a = sc.observable(obs)?;
    let i = sc.instrument(instr)?;
    let b = sc.observable(then)?;
    let c = condition_observable(b, a, i)?;
    let value = json!({
        "command": "condition",
        "formula": "(B|[I]A)(y) = sum_x I_x*(B_y)",
        "summary": format!("({then}|[{instr}]{obs}): {} outcomes", c.len()),
        "observable": observable_json(&c),
    });
    Ok(Report { value, code: EXIT_PASS })
}

fn cmd_commutant(sc: &Scenario, state: &str, a: &str, b: &str) -> Result<Report, Abort> {
    let alpha = sc.state(state)?;
    let x = sc.effect(a)?;
    let y = sc.effect(b)?;
    let v = commutant(alpha, x, y)?;
    let zero = v.amax() <= x.model().tol();
    let value = json!({
        "command": "commutant",
        "formula": "[a,b]_alpha = alpha(b)a - alpha(a)b",
        "summary": format!("[{a},{b}]_{state} {}", if zero { "= 0" } else { "!= 0" }),
        "alpha_a": alpha.pair(x.vector()),
        "alpha_b": alpha.pair(y.vector()),
        "vector": vector_json(&v),
        "is_zero": zero,
    });
    Ok(Report { value, code: EXIT_PASS })
}

fn cmd_compose(sc: &Scenario, i: &str, j: &str) -> Result<Report, Abort> {
    let first = sc.instrument(i)?;
    let second = sc.instrument(j)?;
    let k = compose_instruments(first, second)?;
    let value = json!({
        "command": "compose",
        "formula": "(I o J)(x,y)* = I_x* J_y*",
        "summary": format!("{i} o {j}: {}x{} bi-instrument", k.rows().len(), k.cols().len()),
        "bi_instrument": bi_instrument_json(&k),
        "measured": bi_observable_json(&k.measured_bi_observable()),
        "total_is_channel": k.marginals().0.total().is_channel(),
    });
    Ok(Report { value, code: EXIT_PASS })
}

// ----- JSON views -----

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn vector_json(v: &ConeVector) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|r| m.row(r).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn operation_json(op: &Operation) -> Value {
    json!({ "dual_matrix": matrix_json(op.dual_matrix()) })
}

fn observable_json(o: &Observable) -> Value {
    json!({
        "outcomes": o.outcomes(),
        "effects": o.effects().iter().map(|e| vector_json(e.vector())).collect::<Vec<_>>(),
    })
}

fn bi_observable_json(c: &BiObservable) -> Value {
    let cells: Vec<Vec<Value>> = (0..c.rows().len())
        .map(|x| (0..c.cols().len()).map(|y| vector_json(c.cell(x, y).vector())).collect())
        .collect();
    json!({ "rows": c.rows(), "cols": c.cols(), "cells": cells })
}

fn bi_instrument_json(k: &BiInstrument) -> Value {
    let cells: Vec<Vec<Value>> = (0..k.rows().len())
        .map(|x| (0..k.cols().len()).map(|y| matrix_json(k.cell(x, y).dual_matrix())).collect())
        .collect();
    json!({ "rows": k.rows(), "cols": k.cols(), "dual_matrices": cells })
}

fn certificate_json(c: &crate::feasibility::FarkasCertificate) -> Value {
    json!({ "equality_multipliers": c.equality_multipliers, "facet_multipliers": c.facet_multipliers })
}

// ----- output -----

/// `%.12g`.
pub fn format_g(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const P: i32 = 12;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct GFormatter;

impl serde_json::ser::Formatter for GFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            w.write_all(format_g(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }
}

/// Compact JSON with `%.12g` floats and sorted keys, newline-terminated.
pub fn to_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, GFormatter);
    serde::Serialize::serialize(v, &mut ser).expect("JSON values serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn scalar_text(v: &Value) -> Option<String> {
    Some(match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format_g(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        _ => return None,
    })
}

fn inline_text(v: &Value) -> Option<String> {
    if let Some(s) = scalar_text(v) {
        return Some(s);
    }
    match v {
        Value::Array(xs) if xs.iter().all(|x| !x.is_object()) => {
            let parts: Option<Vec<String>> = xs.iter().map(inline_text).collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        _ => None,
    }
}

fn text_lines(map: &Map<String, Value>, indent: usize, top: bool, out: &mut String) {
    let pad = "  ".repeat(indent);
    for (k, v) in map {
        if top && (k == "summary" || k == "command") {
            continue;
        }
        if let Some(s) = inline_text(v) {
            out.push_str(&format!("{pad}{k}: {s}\n"));
            continue;
        }
        out.push_str(&format!("{pad}{k}:\n"));
        match v {
            Value::Object(m) => text_lines(m, indent + 1, false, out),
            Value::Array(xs) => {
                for (n, x) in xs.iter().enumerate() {
                    match x {
                        Value::Object(m) => {
                            out.push_str(&format!("{pad}  [{n}]\n"));
                            text_lines(m, indent + 2, false, out);
                        }
                        other => out.push_str(&format!("{pad}  {}\n", inline_text(other).unwrap_or_default())),
                    }
                }
            }
            _ => {}
        }
    }
}

/// Human-readable rendering: the summary line, then every field.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    if let Some(s) = v.get("summary").and_then(Value::as_str) {
        out.push_str(s);
        out.push('\n');
    }
    if let Value::Object(m) = v {
        text_lines(m, 1, true, &mut out);
    }
    out
}
