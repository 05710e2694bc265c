//! JSON scenario files: named models, effects, states, observables,
//! operations and instruments, plus optional check directives.
//!
//! ```json
//! {
//!   "version": "1",
//!   "models": { "g": { "kind": "polyhedral", "generators": [[1,1,0]], "facets": [[1,1,1]], "unit": [1,0,0] } },
//!   "effects": { "a": { "model": "g", "coords": [0.5, 0.5, 0] } },
//!   "observables": { "X": { "model": "g", "outcomes": ["+", "-"], "effects": [[0.5,0.5,0], [0.5,-0.5,0]] } }
//! }
//! ```
//!
//! Unknown fields are rejected. Problems are split in two: malformed input
//! and unresolved names are [`LoadError`]s, while objects that parse but
//! violate their invariants are recorded as [`Violation`]s and left out.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::cone::{hermitian_to_coords, ConeModel, ConeVector, Effect, Model};
use crate::error::Error;
use crate::hilbert::{born_state, kraus_to_operation, luders_instrument, CMatrix, HilbertModel, KrausOperation};
use crate::holevo::{mixed_holevo, mixed_holevo_instrument, pure_holevo, pure_holevo_instrument};
use crate::instruments::Instrument;
use crate::observables::{Observable, Verdict};
use crate::operations::Operation;
use crate::states::State;

pub const SCENARIO_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("unresolved {kind} `{name}`")]
    Unresolved { kind: &'static str, name: String },
}

/// An object that parsed but failed its invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: &'static str,
    pub name: String,
    pub message: String,
}

/// A check directive with its expected outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    Coexist { a: String, b: String, expect: Verdict },
    Repeatable { effect: String, operation: Option<String>, expect: bool },
    Channel { operation: String, expect: bool },
    Measures { instrument: String, observable: String },
    Pure { operation: String, expect: bool },
}

#[derive(Debug, Clone, Default)]
pub struct Scenario {
    pub models: BTreeMap<String, Model>,
    pub effects: BTreeMap<String, Effect>,
    pub states: BTreeMap<String, State>,
    pub observables: BTreeMap<String, Observable>,
    pub operations: BTreeMap<String, Operation>,
    pub instruments: BTreeMap<String, Instrument>,
    pub checks: Vec<Check>,
    pub violations: Vec<Violation>,
    invalid: BTreeSet<(&'static str, String)>,
}

/// Why a name could not be used.
#[derive(Debug, Clone, PartialEq)]
pub enum Lookup {
    Missing(LoadError),
    Invalid(Violation),
}

enum Fail {
    Input(LoadError),
    Invalid(String),
}

impl From<LoadError> for Fail {
    fn from(e: LoadError) -> Self {
        Fail::Input(e)
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Invalid(e.to_string())
    }
}

type Built<T> = std::result::Result<T, Fail>;

// ----- raw JSON shapes -----

type ComplexEntries = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: String,
    #[serde(default)]
    models: BTreeMap<String, Value>,
    #[serde(default)]
    effects: BTreeMap<String, Value>,
    #[serde(default)]
    states: BTreeMap<String, Value>,
    #[serde(default)]
    observables: BTreeMap<String, Value>,
    #[serde(default)]
    operations: BTreeMap<String, Value>,
    #[serde(default)]
    instruments: BTreeMap<String, Value>,
    #[serde(default)]
    checks: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolyhedral {
    generators: Vec<Vec<f64>>,
    facets: Vec<Vec<f64>>,
    unit: Vec<f64>,
    tol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPsd {
    hilbert_dim: usize,
    tol: Option<f64>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct RawEffect {
    model: String,
    coords: Option<Vec<f64>>,
    matrix: Option<ComplexEntries>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct RawState {
    model: String,
    coords: Option<Vec<f64>>,
    density: Option<ComplexEntries>,
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum EffectRef {
    Name(String),
    Inline(RawEffect),
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum StateRef {
    Name(String),
    Inline(RawState),
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct MatrixEntry {
    matrix: ComplexEntries,
}

/// An observable's effect: a name, raw coordinates, or a complex matrix.
#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum ObservableEntry {
    Name(String),
    Coords(Vec<f64>),
    Matrix(MatrixEntry),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    model: String,
    outcomes: Vec<String>,
    effects: Vec<ObservableEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrixOp {
    source: String,
    target: String,
    dual_matrix: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPureHolevo {
    effect: EffectRef,
    state: StateRef,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixedHolevo {
    terms: Vec<RawPureHolevo>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstant {
    source: String,
    state: StateRef,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKraus {
    model: String,
    matrices: Vec<ComplexEntries>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIdentity {
    model: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OperationRef {
    Name(String),
    Inline(Value),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstrument {
    outcomes: Vec<String>,
    operations: Vec<OperationRef>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHolevoInstrument {
    observable: String,
    states: Vec<StateRef>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixedHolevoInstrument {
    weights: Vec<f64>,
    observables: Vec<String>,
    states: Vec<Vec<StateRef>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLuders {
    observable: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoexistCheck {
    a: String,
    b: String,
    expect: Verdict,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRepeatableCheck {
    effect: String,
    operation: Option<String>,
    expect: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannelCheck {
    operation: String,
    expect: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasuresCheck {
    instrument: String,
    observable: String,
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.to_ascii_uppercase().as_str() {
            "FEASIBLE" => Ok(Verdict::Feasible),
            "INFEASIBLE" => Ok(Verdict::Infeasible),
            "UNDECIDED" => Ok(Verdict::Undecided),
            _ => Err(serde::de::Error::custom(format!("unknown verdict `{s}`"))),
        }
    }
}

fn from_value<T: DeserializeOwned>(v: Value, what: &str) -> std::result::Result<T, LoadError> {
    serde_json::from_value(v).map_err(|e| LoadError::Parse(format!("{what}: {e}")))
}

/// Splits off a string tag field, returning the tag and the remaining object.
fn split_tag(v: &Value, tag: &str, what: &str) -> std::result::Result<(Option<String>, Value), LoadError> {
    let Value::Object(map) = v else {
        return Err(LoadError::Parse(format!("{what}: expected an object")));
    };
    let mut map = map.clone();
    let t = match map.remove(tag) {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(LoadError::Parse(format!("{what}: `{tag}` must be a string"))),
    };
    Ok((t, Value::Object(map)))
}

fn complex_matrix(entries: &ComplexEntries, what: &str) -> Built<CMatrix> {
    let n = entries.len();
    if n == 0 || entries.iter().any(|r| r.len() != n) {
        return Err(Fail::Input(LoadError::Parse(format!("{what}: complex matrix must be square"))));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(entries[i][j][0], entries[i][j][1])))
}

// ----- loading -----

pub fn load(path: &Path, tol: Option<f64>) -> std::result::Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse(&text, tol)
}

/// Parses a scenario. `tol` overrides the tolerance of every model.
pub fn parse(text: &str, tol: Option<f64>) -> std::result::Result<Scenario, LoadError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    if raw.version != SCENARIO_VERSION {
        return Err(LoadError::Parse(format!(
            "unsupported version `{}` (expected `{SCENARIO_VERSION}`)",
            raw.version
        )));
    }
    if let Some(t) = tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(LoadError::Parse(format!("tolerance {t} must be a nonnegative number")));
        }
    }
    let mut sc = Scenario::default();
    for (name, v) in &raw.models {
        let built = build_model(v, name, tol);
        sc.record("model", name, built, |sc, m| {
            sc.models.insert(name.clone(), m);
        })?;
    }
    for (name, v) in &raw.effects {
        let built = from_value::<RawEffect>(v.clone(), &format!("effect `{name}`"))
            .map_err(Fail::Input)
            .and_then(|r| sc.build_effect(&r, name));
        sc.record("effect", name, built, |sc, e| {
            sc.effects.insert(name.clone(), e);
        })?;
    }
    for (name, v) in &raw.states {
        let built = from_value::<RawState>(v.clone(), &format!("state `{name}`"))
            .map_err(Fail::Input)
            .and_then(|r| sc.build_state(&r, name));
        sc.record("state", name, built, |sc, s| {
            sc.states.insert(name.clone(), s);
        })?;
    }
    for (name, v) in &raw.observables {
        let built = from_value::<RawObservable>(v.clone(), &format!("observable `{name}`"))
            .map_err(Fail::Input)
            .and_then(|r| sc.build_observable(r, name));
        sc.record("observable", name, built, |sc, o| {
            sc.observables.insert(name.clone(), o);
        })?;
    }
    for (name, v) in &raw.operations {
        let built = sc.build_operation(v, name);
        sc.record("operation", name, built, |sc, o| {
            sc.operations.insert(name.clone(), o);
        })?;
    }
    for (name, v) in &raw.instruments {
        let built = sc.build_instrument(v, name);
        sc.record("instrument", name, built, |sc, i| {
            sc.instruments.insert(name.clone(), i);
        })?;
    }
    for (k, v) in raw.checks.iter().enumerate() {
        sc.checks.push(parse_check(v, k)?);
    }
    Ok(sc)
}

fn build_model(v: &Value, name: &str, tol: Option<f64>) -> Built<Model> {
    let what = format!("model `{name}`");
    let (kind, rest) = split_tag(v, "kind", &what)?;
    let model = match kind.as_deref() {
        Some("polyhedral") => {
            let r: RawPolyhedral = from_value(rest, &what)?;
            let vecs = |xs: Vec<Vec<f64>>| xs.into_iter().map(ConeVector::from_vec).collect::<Vec<_>>();
            ConeModel::polyhedral_with_tol(
                vecs(r.generators),
                vecs(r.facets),
                ConeVector::from_vec(r.unit),
                tol.or(r.tol).unwrap_or(crate::cone::DEFAULT_TOL),
            )?
        }
        Some("psd") => {
            let r: RawPsd = from_value(rest, &what)?;
            ConeModel::psd_with_tol(r.hilbert_dim, tol.or(r.tol).unwrap_or(crate::cone::DEFAULT_TOL))?
        }
        Some(other) => return Err(Fail::Input(LoadError::Parse(format!("{what}: unknown kind `{other}`")))),
        None => return Err(Fail::Input(LoadError::Parse(format!("{what}: missing `kind`")))),
    };
    Ok(model)
}

fn parse_check(v: &Value, k: usize) -> std::result::Result<Check, LoadError> {
    let what = format!("check #{k}");
    let (kind, rest) = split_tag(v, "check", &what)?;
    Ok(match kind.as_deref() {
        Some("coexist") => {
            let r: RawCoexistCheck = from_value(rest, &what)?;
            Check::Coexist { a: r.a, b: r.b, expect: r.expect }
        }
        Some("repeatable") => {
            let r: RawRepeatableCheck = from_value(rest, &what)?;
            Check::Repeatable { effect: r.effect, operation: r.operation, expect: r.expect }
        }
        Some("channel") => {
            let r: RawChannelCheck = from_value(rest, &what)?;
            Check::Channel { operation: r.operation, expect: r.expect }
        }
        Some("pure") => {
            let r: RawChannelCheck = from_value(rest, &what)?;
            Check::Pure { operation: r.operation, expect: r.expect }
        }
        Some("measures") => {
            let r: RawMeasuresCheck = from_value(rest, &what)?;
            Check::Measures { instrument: r.instrument, observable: r.observable }
        }
        Some(other) => return Err(LoadError::Parse(format!("{what}: unknown check `{other}`"))),
        None => return Err(LoadError::Parse(format!("{what}: missing `check`"))),
    })
}

impl Scenario {
    fn record<T>(
        &mut self,
        kind: &'static str,
        name: &str,
        built: Built<T>,
        insert: impl FnOnce(&mut Self, T),
    ) -> std::result::Result<(), LoadError> {
        match built {
            Ok(v) => {
                insert(self, v);
                Ok(())
            }
            Err(Fail::Input(e)) => Err(e),
            Err(Fail::Invalid(message)) => {
                self.invalid.insert((kind, name.to_string()));
                self.violations.push(Violation { kind, name: name.to_string(), message });
                Ok(())
            }
        }
    }

    fn resolve<'a, T>(&self, map: &'a BTreeMap<String, T>, kind: &'static str, name: &str) -> Built<&'a T> {
        if let Some(v) = map.get(name) {
            return Ok(v);
        }
        if self.invalid.contains(&(kind, name.to_string())) {
            return Err(Fail::Invalid(format!("depends on invalid {kind} `{name}`")));
        }
        Err(Fail::Input(LoadError::Unresolved { kind, name: name.to_string() }))
    }

    fn build_effect(&self, r: &RawEffect, name: &str) -> Built<Effect> {
        let model = self.resolve(&self.models, "model", &r.model)?.clone();
        match (&r.coords, &r.matrix) {
            (Some(c), None) => Ok(Effect::new(&model, ConeVector::from_vec(c.clone()))?),
            (None, Some(m)) => {
                let h = HilbertModel::from_model(&model)?;
                Ok(h.effect(&complex_matrix(m, name)?)?)
            }
            _ => Err(Fail::Input(LoadError::Parse(format!(
                "effect `{name}`: give exactly one of `coords` and `matrix`"
            )))),
        }
    }

    fn build_state(&self, r: &RawState, name: &str) -> Built<State> {
        let model = self.resolve(&self.models, "model", &r.model)?.clone();
        match (&r.coords, &r.density) {
            (Some(c), None) => Ok(State::new(&model, ConeVector::from_vec(c.clone()))?),
            (None, Some(m)) => {
                let h = HilbertModel::from_model(&model)?;
                Ok(born_state(&h, &complex_matrix(m, name)?)?)
            }
            _ => Err(Fail::Input(LoadError::Parse(format!(
                "state `{name}`: give exactly one of `coords` and `density`"
            )))),
        }
    }

    fn effect_ref(&self, r: &EffectRef, ctx: &str) -> Built<Effect> {
        match r {
            EffectRef::Name(n) => Ok(self.resolve(&self.effects, "effect", n)?.clone()),
            EffectRef::Inline(raw) => self.build_effect(raw, ctx),
        }
    }

    fn state_ref(&self, r: &StateRef, ctx: &str) -> Built<State> {
        match r {
            StateRef::Name(n) => Ok(self.resolve(&self.states, "state", n)?.clone()),
            StateRef::Inline(raw) => self.build_state(raw, ctx),
        }
    }

    fn build_observable(&self, r: RawObservable, name: &str) -> Built<Observable> {
        let model = self.resolve(&self.models, "model", &r.model)?.clone();
        let effects = r
            .effects
            .iter()
            .map(|e| match e {
                ObservableEntry::Name(n) => Ok(self.resolve(&self.effects, "effect", n)?.clone()),
                ObservableEntry::Coords(c) => Ok(Effect::new(&model, ConeVector::from_vec(c.clone()))?),
                ObservableEntry::Matrix(m) => {
                    let h = HilbertModel::from_model(&model)?;
                    Ok(h.effect(&complex_matrix(&m.matrix, name)?)?)
                }
            })
            .collect::<Built<Vec<_>>>()?;
        Ok(Observable::new(&model, r.outcomes, effects)?)
    }

    fn build_operation(&self, v: &Value, name: &str) -> Built<Operation> {
        let what = format!("operation `{name}`");
        let (kind, rest) = split_tag(v, "type", &what)?;
        Ok(match kind.as_deref() {
            None => {
                let r: RawMatrixOp = from_value(rest, &what)?;
                let source = self.resolve(&self.models, "model", &r.source)?;
                let target = self.resolve(&self.models, "model", &r.target)?;
                let rows = r.dual_matrix.len();
                let cols = r.dual_matrix.first().map_or(0, Vec::len);
                if r.dual_matrix.iter().any(|row| row.len() != cols) {
                    return Err(Fail::Input(LoadError::Parse(format!("{what}: ragged dual matrix"))));
                }
                let flat: Vec<f64> = r.dual_matrix.into_iter().flatten().collect();
                Operation::new(source, target, DMatrix::from_row_slice(rows, cols, &flat))?
            }
            Some("pure_holevo") => {
                let r: RawPureHolevo = from_value(rest, &what)?;
                pure_holevo(&self.effect_ref(&r.effect, name)?, &self.state_ref(&r.state, name)?)
            }
            Some("mixed_holevo") => {
                let r: RawMixedHolevo = from_value(rest, &what)?;
                let terms = r
                    .terms
                    .iter()
                    .map(|t| Ok((self.effect_ref(&t.effect, name)?, self.state_ref(&t.state, name)?)))
                    .collect::<Built<Vec<_>>>()?;
                mixed_holevo(&terms)?
            }
            Some("constant") => {
                let r: RawConstant = from_value(rest, &what)?;
                let source = self.resolve(&self.models, "model", &r.source)?;
                Operation::constant_channel(source, &self.state_ref(&r.state, name)?)
            }
            Some("kraus") => {
                let r: RawKraus = from_value(rest, &what)?;
                let model = self.resolve(&self.models, "model", &r.model)?;
                let h = HilbertModel::from_model(model)?;
                let mats = r.matrices.iter().map(|m| complex_matrix(m, name)).collect::<Built<Vec<_>>>()?;
                kraus_to_operation(&h, &KrausOperation::new(mats, model.tol())?)?
            }
            Some("identity") => {
                let r: RawIdentity = from_value(rest, &what)?;
                Operation::identity(self.resolve(&self.models, "model", &r.model)?)
            }
            Some(other) => return Err(Fail::Input(LoadError::Parse(format!("{what}: unknown type `{other}`")))),
        })
    }

    fn build_instrument(&self, v: &Value, name: &str) -> Built<Instrument> {
        let what = format!("instrument `{name}`");
        let (kind, rest) = split_tag(v, "type", &what)?;
        Ok(match kind.as_deref() {
            None => {
                let r: RawInstrument = from_value(rest, &what)?;
                let ops = r
                    .operations
                    .iter()
                    .enumerate()
                    .map(|(k, o)| match o {
                        OperationRef::Name(n) => Ok(self.resolve(&self.operations, "operation", n)?.clone()),
                        OperationRef::Inline(v) => self.build_operation(v, &format!("{name}[{k}]")),
                    })
                    .collect::<Built<Vec<_>>>()?;
                Instrument::new(r.outcomes, ops)?
            }
            Some("holevo_instrument") => {
                let r: RawHolevoInstrument = from_value(rest, &what)?;
                let a = self.resolve(&self.observables, "observable", &r.observable)?;
                let states = r.states.iter().map(|s| self.state_ref(s, name)).collect::<Built<Vec<_>>>()?;
                pure_holevo_instrument(a, &states)?
            }
            Some("mixed_holevo_instrument") => {
                let r: RawMixedHolevoInstrument = from_value(rest, &what)?;
                let obs = r
                    .observables
                    .iter()
                    .map(|n| Ok(self.resolve(&self.observables, "observable", n)?.clone()))
                    .collect::<Built<Vec<_>>>()?;
                let tables = r
                    .states
                    .iter()
                    .map(|t| t.iter().map(|s| self.state_ref(s, name)).collect::<Built<Vec<_>>>())
                    .collect::<Built<Vec<_>>>()?;
                mixed_holevo_instrument(&r.weights, &obs, &tables)?
            }
            Some("luders") => {
                let r: RawLuders = from_value(rest, &what)?;
                luders_instrument(self.resolve(&self.observables, "observable", &r.observable)?)?
            }
            Some(other) => return Err(Fail::Input(LoadError::Parse(format!("{what}: unknown type `{other}`")))),
        })
    }

    fn lookup<'a, T>(&self, map: &'a BTreeMap<String, T>, kind: &'static str, name: &str) -> std::result::Result<&'a T, Lookup> {
        if let Some(v) = map.get(name) {
            return Ok(v);
        }
        match self.violations.iter().find(|v| v.kind == kind && v.name == name) {
            Some(v) => Err(Lookup::Invalid(v.clone())),
            None => Err(Lookup::Missing(LoadError::Unresolved { kind, name: name.to_string() })),
        }
    }

    pub fn effect(&self, name: &str) -> std::result::Result<&Effect, Lookup> {
        self.lookup(&self.effects, "effect", name)
    }

    pub fn state(&self, name: &str) -> std::result::Result<&State, Lookup> {
        self.lookup(&self.states, "state", name)
    }

    pub fn observable(&self, name: &str) -> std::result::Result<&Observable, Lookup> {
        self.lookup(&self.observables, "observable", name)
    }

    pub fn operation(&self, name: &str) -> std::result::Result<&Operation, Lookup> {
        self.lookup(&self.operations, "operation", name)
    }

    pub fn instrument(&self, name: &str) -> std::result::Result<&Instrument, Lookup> {
        self.lookup(&self.instruments, "instrument", name)
    }

    /// Total number of objects that loaded successfully.
    pub fn object_count(&self) -> usize {
        self.models.len()
            + self.effects.len()
            + self.states.len()
            + self.observables.len()
            + self.operations.len()
            + self.instruments.len()
    }
}

/// Coordinates of a Hermitian matrix given as `[re, im]` entries; exposed for
/// tools that write scenarios.
pub fn complex_entries_to_coords(entries: &[Vec<[f64; 2]>]) -> Option<ConeVector> {
    let n = entries.len();
    if entries.iter().any(|r| r.len() != n) {
        return None;
    }
    let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(entries[i][j][0], entries[i][j][1]));
    Some(hermitian_to_coords(&m))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GBIT: &str = r#"{
        "version": "1",
        "models": { "g": { "kind": "polyhedral",
            "generators": [[1,1,0],[1,-1,0],[1,0,1],[1,0,-1]],
            "facets": [[1,1,1],[1,1,-1],[1,-1,1],[1,-1,-1]],
            "unit": [1,0,0] } },
        "effects": { "x": { "model": "g", "coords": [0.5, 0.5, 0] } },
        "states": { "s": { "model": "g", "coords": [1, 1, 1] } },
        "observables": {
            "X": { "model": "g", "outcomes": ["+", "-"], "effects": ["x", [0.5, -0.5, 0]] }
        },
        "operations": { "h": { "type": "pure_holevo", "effect": "x", "state": "s" } },
        "instruments": { "I": { "type": "holevo_instrument", "observable": "X", "states": ["s", "s"] } },
        "checks": [ { "check": "coexist", "a": "X", "b": "X", "expect": "feasible" } ]
    }"#;

    #[test]
    fn parses_a_complete_scenario() {
        let sc = parse(GBIT, None).unwrap();
        assert!(sc.violations.is_empty());
        assert_eq!(sc.object_count(), 6);
        assert_eq!(sc.checks.len(), 1);
        assert!(sc.instrument("I").unwrap().measured_observable().approx_eq(sc.observable("X").unwrap(), 1e-15));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = GBIT.replace("\"coords\": [0.5, 0.5, 0] }", "\"coords\": [0.5, 0.5, 0], \"colour\": 1 }");
        assert!(matches!(parse(&bad, None), Err(LoadError::Parse(_))));
        let bad = GBIT.replace("\"version\": \"1\",", "\"version\": \"1\", \"extra\": {},");
        assert!(matches!(parse(&bad, None), Err(LoadError::Parse(_))));
        let bad = GBIT.replace("\"version\": \"1\"", "\"version\": \"2\"");
        assert!(matches!(parse(&bad, None), Err(LoadError::Parse(_))));
    }

    #[test]
    fn unresolved_names_are_input_errors() {
        let bad = GBIT.replace("\"effect\": \"x\"", "\"effect\": \"nope\"");
        assert!(matches!(parse(&bad, None), Err(LoadError::Unresolved { kind: "effect", .. })));
    }

    #[test]
    fn invariant_violations_are_recorded() {
        let bad = GBIT.replace("[0.5, 0.5, 0] }", "[0.9, 0.5, 0.5] }");
        let sc = parse(&bad, None).unwrap();
        let names: Vec<_> = sc.violations.iter().map(|v| (v.kind, v.name.as_str())).collect();
        assert!(names.contains(&("effect", "x")));
        // dependents are invalid too, not unresolved
        assert!(names.contains(&("observable", "X")));
        assert!(matches!(sc.effect("x"), Err(Lookup::Invalid(_))));
        assert!(matches!(sc.effect("y"), Err(Lookup::Missing(_))));
    }

    #[test]
    fn qubit_matrices() {
        let text = r#"{
            "version": "1",
            "models": { "q": { "kind": "psd", "hilbert_dim": 2 } },
            "effects": { "p0": { "model": "q", "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]] } },
            "states": { "plus": { "model": "q", "density": [[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]] } },
            "observables": { "Z": { "model": "q", "outcomes": ["0","1"],
                "effects": ["p0", { "matrix": [[[0,0],[0,0]],[[0,0],[1,0]]] }] } },
            "operations": { "u": { "type": "kraus", "model": "q", "matrices": [[[[0,0],[1,0]],[[1,0],[0,0]]]] } },
            "instruments": { "L": { "type": "luders", "observable": "Z" } }
        }"#;
        let sc = parse(text, Some(1e-10)).unwrap();
        assert!(sc.violations.is_empty(), "{:?}", sc.violations);
        assert!(sc.operation("u").unwrap().is_channel());
        assert_eq!(sc.models["q"].tol(), 1e-10);
    }
}
