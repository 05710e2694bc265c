//! Finite observables, bi-observables and coexistence.

use std::collections::HashSet;

use serde::Serialize;

use crate::cone::{ConeKind, ConeModel, ConeVector, Effect, Model};
use crate::error::{Error, Result};
use crate::feasibility::{solve_feasibility, ConeBlock, FarkasCertificate, Feasibility, LpProblem};
use crate::hilbert::{matrix_sqrt_with_tol, HilbertModel};
use crate::states::{Functional, State};

/// Tolerance used when re-verifying a joint observable.
pub const JOINT_TOL: f64 = 1e-7;

/// A finite family of effects `{Aₓ}` with `Σ Aₓ = u`.
#[derive(Debug, Clone)]
pub struct Observable {
    model: Model,
    outcomes: Vec<String>,
    effects: Vec<Effect>,
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidObservable(format!("duplicate outcome label `{l}`")));
        }
    }
    Ok(())
}

fn sum_vectors<'a>(model: &Model, xs: impl IntoIterator<Item = &'a ConeVector>) -> ConeVector {
    xs.into_iter().fold(model.zero(), |acc, x| acc + x)
}

impl Observable {
    pub fn new(model: &Model, outcomes: Vec<String>, effects: Vec<Effect>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidObservable("no outcomes".into()));
        }
        if outcomes.len() != effects.len() {
            return Err(Error::InvalidObservable(format!(
                "{} labels for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        check_labels(&outcomes)?;
        if effects.iter().any(|e| !ConeModel::same(e.model(), model)) {
            return Err(Error::ModelMismatch);
        }
        let total = sum_vectors(model, effects.iter().map(Effect::vector));
        let dev = (&total - model.unit()).amax();
        if dev > model.tol() * effects.len() as f64 {
            return Err(Error::InvalidObservable(format!("effects sum to u only within {dev:e}")));
        }
        Ok(Observable { model: model.clone(), outcomes, effects })
    }

    /// Outcomes labelled `x0, x1, …`.
    pub fn from_effects(model: &Model, effects: Vec<Effect>) -> Result<Self> {
        let outcomes = (0..effects.len()).map(|i| format!("x{i}")).collect();
        Self::new(model, outcomes, effects)
    }

    /// `{u}`.
    pub fn trivial(model: &Model) -> Self {
        Observable {
            model: model.clone(),
            outcomes: vec!["u".into()],
            effects: vec![Effect::unit(model)],
        }
    }

    /// `{a, a′}` with outcomes `yes`, `no`.
    pub fn binary(a: &Effect) -> Self {
        Observable {
            model: a.model().clone(),
            outcomes: vec!["yes".into(), "no".into()],
            effects: vec![a.clone(), a.complement()],
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    pub fn effect(&self, label: &str) -> Result<&Effect> {
        Ok(&self.effects[self.index_of(label)?])
    }

    /// The effect-valued measure `A(Δ) = Σ_{x∈Δ} Aₓ`.
    pub fn evm<S: AsRef<str>>(&self, subset: &[S]) -> Result<Effect> {
        let mut seen = HashSet::new();
        let mut acc = self.model.zero();
        for label in subset {
            let i = self.index_of(label.as_ref())?;
            if seen.insert(i) {
                acc += self.effects[i].vector();
            }
        }
        Ok(Effect::from_parts(&self.model, acc))
    }

    /// `(s(Aₓ))ₓ`.
    pub fn distribution(&self, s: &State) -> Result<Vec<f64>> {
        if !ConeModel::same(s.model(), &self.model) {
            return Err(Error::ModelMismatch);
        }
        Ok(self.effects.iter().map(|e| s.pair(e.vector())).collect())
    }

    /// Same labels and effects within `tol`.
    pub fn approx_eq(&self, other: &Observable, tol: f64) -> bool {
        self.outcomes == other.outcomes
            && self.effects.len() == other.effects.len()
            && self.effects.iter().zip(&other.effects).all(|(a, b)| a.approx_eq(b, tol))
    }

    fn same_effects(&self, other: &Observable, tol: f64) -> bool {
        self.effects.len() == other.effects.len()
            && self.effects.iter().zip(&other.effects).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// An observable on a product outcome grid `Ω₁ × Ω₂`, stored row-major with
/// the first outcome outermost.
#[derive(Debug, Clone)]
pub struct BiObservable {
    model: Model,
    rows: Vec<String>,
    cols: Vec<String>,
    cells: Vec<Effect>,
}

impl BiObservable {
    pub fn new(model: &Model, rows: Vec<String>, cols: Vec<String>, cells: Vec<Effect>) -> Result<Self> {
        check_labels(&rows)?;
        check_labels(&cols)?;
        if rows.is_empty() || cols.is_empty() || cells.len() != rows.len() * cols.len() {
            return Err(Error::InvalidObservable(format!(
                "grid {}x{} has {} cells",
                rows.len(),
                cols.len(),
                cells.len()
            )));
        }
        if cells.iter().any(|e| !ConeModel::same(e.model(), model)) {
            return Err(Error::ModelMismatch);
        }
        let total = sum_vectors(model, cells.iter().map(Effect::vector));
        let dev = (&total - model.unit()).amax();
        if dev > model.tol() * cells.len() as f64 {
            return Err(Error::InvalidObservable(format!("cells sum to u only within {dev:e}")));
        }
        Ok(BiObservable { model: model.clone(), rows, cols, cells })
    }

    pub(crate) fn from_parts(model: &Model, rows: Vec<String>, cols: Vec<String>, cells: Vec<Effect>) -> Self {
        BiObservable { model: model.clone(), rows, cols, cells }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn cells(&self) -> &[Effect] {
        &self.cells
    }

    pub fn cell(&self, x: usize, y: usize) -> &Effect {
        &self.cells[x * self.cols.len() + y]
    }

    /// `C¹ₓ = Σᵧ Cₓᵧ` and `C²ᵧ = Σₓ Cₓᵧ`.
    pub fn marginals(&self) -> (Observable, Observable) {
        let (nr, nc) = (self.rows.len(), self.cols.len());
        let first = (0..nr)
            .map(|x| Effect::from_parts(&self.model, sum_vectors(&self.model, (0..nc).map(|y| self.cell(x, y).vector()))))
            .collect();
        let second = (0..nc)
            .map(|y| Effect::from_parts(&self.model, sum_vectors(&self.model, (0..nr).map(|x| self.cell(x, y).vector()))))
            .collect();
        (
            Observable { model: self.model.clone(), outcomes: self.rows.clone(), effects: first },
            Observable { model: self.model.clone(), outcomes: self.cols.clone(), effects: second },
        )
    }

    /// The same effects as a plain observable with outcomes `x,y`.
    pub fn as_observable(&self) -> Observable {
        let outcomes = self
            .rows
            .iter()
            .flat_map(|x| self.cols.iter().map(move |y| format!("{x},{y}")))
            .collect();
        Observable { model: self.model.clone(), outcomes, effects: self.cells.clone() }
    }

    /// The diagonal bi-observable `Cₓₓ = Aₓ` of `A` with itself.
    pub fn diagonal(a: &Observable) -> Self {
        let n = a.len();
        let cells = (0..n * n)
            .map(|i| if i / n == i % n { a.effects[i / n].clone() } else { Effect::zero(&a.model) })
            .collect();
        BiObservable::from_parts(&a.model, a.outcomes.clone(), a.outcomes.clone(), cells)
    }
}

/// Outcome of a coexistence query.
#[derive(Debug, Clone)]
pub enum Coexistence<W> {
    Compatible(W),
    Incompatible(FarkasCertificate),
    /// The backend cannot decide this instance.
    Undecided(String),
}

impl<W> Coexistence<W> {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Coexistence::Compatible(_))
    }

    pub fn is_incompatible(&self) -> bool {
        matches!(self, Coexistence::Incompatible(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Coexistence::Compatible(w) => Some(w),
            _ => None,
        }
    }

    pub fn verdict(&self) -> Verdict {
        match self {
            Coexistence::Compatible(_) => Verdict::Feasible,
            Coexistence::Incompatible(_) => Verdict::Infeasible,
            Coexistence::Undecided(_) => Verdict::Undecided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Feasible,
    Infeasible,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Feasible => "FEASIBLE",
            Verdict::Infeasible => "INFEASIBLE",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

/// An observable together with two outcome subsets realizing two effects.
#[derive(Debug, Clone)]
pub struct EffectWitness {
    pub observable: Observable,
    pub first: Vec<String>,
    pub second: Vec<String>,
}

/// Whether `a` and `b` are both coarse-grainings `A(Δ₁)`, `A(Δ₂)` of one
/// observable. Decided through coexistence of `{a, a′}` and `{b, b′}`.
pub fn effects_coexist(a: &Effect, b: &Effect) -> Result<Coexistence<EffectWitness>> {
    if !ConeModel::same(a.model(), b.model()) {
        return Err(Error::ModelMismatch);
    }
    let model = a.model();
    let tol = model.tol();
    let pair = |obs: Observable, first: &[&str], second: &[&str]| {
        Coexistence::Compatible(EffectWitness {
            observable: obs,
            first: first.iter().map(|s| s.to_string()).collect(),
            second: second.iter().map(|s| s.to_string()).collect(),
        })
    };
    let labels = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    if a.approx_eq(b, tol) {
        let obs = Observable::new(model, labels(&["a", "a'"]), vec![a.clone(), a.complement()])?;
        return Ok(pair(obs, &["a"], &["a"]));
    }
    if a.complement().approx_eq(b, tol) {
        let obs = Observable::new(model, labels(&["a", "a'"]), vec![a.clone(), a.complement()])?;
        return Ok(pair(obs, &["a"], &["a'"]));
    }
    if a.perp(b)? {
        let rest = Effect::from_parts(model, model.unit() - a.vector() - b.vector());
        let obs = Observable { model: model.clone(), outcomes: labels(&["a", "b", "rest"]), effects: vec![a.clone(), b.clone(), rest] };
        return Ok(pair(obs, &["a"], &["b"]));
    }
    Ok(match observables_coexist(&Observable::binary(a), &Observable::binary(b))? {
        Coexistence::Compatible(c) => {
            let mut obs = c.as_observable();
            obs.outcomes = labels(&["a&b", "a&b'", "a'&b", "a'&b'"]);
            pair(obs, &["a&b", "a&b'"], &["a&b", "a'&b"])
        }
        Coexistence::Incompatible(cert) => Coexistence::Incompatible(cert),
        Coexistence::Undecided(why) => Coexistence::Undecided(why),
    })
}

/// The LP whose feasibility is coexistence of `A` and `B` on a polyhedral
/// model: one cone block per cell `Cₓᵧ ∈ K` and the marginal equalities
/// `Σᵧ Cₓᵧ = Aₓ`, `Σₓ Cₓᵧ = Bᵧ`.
pub fn joint_observable_problem(a: &Observable, b: &Observable) -> Result<LpProblem> {
    let facets = a
        .model
        .facets()
        .ok_or_else(|| Error::Unsupported("joint-observable LP needs a polyhedral model".into()))?;
    let d = a.model.dim();
    let (na, nb) = (a.len(), b.len());
    let block = ConeBlock { dim: d, facets: facets.iter().map(|f| f.iter().copied().collect()).collect() };
    let blocks = vec![block; na * nb];
    let nvars = na * nb * d;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for x in 0..na {
        for k in 0..d {
            let mut row = vec![0.0; nvars];
            for y in 0..nb {
                row[(x * nb + y) * d + k] = 1.0;
            }
            rows.push(row);
            rhs.push(a.effects[x].vector()[k]);
        }
    }
    for y in 0..nb {
        for k in 0..d {
            let mut row = vec![0.0; nvars];
            for x in 0..na {
                row[(x * nb + y) * d + k] = 1.0;
            }
            rows.push(row);
            rhs.push(b.effects[y].vector()[k]);
        }
    }
    LpProblem::new(blocks, rows, rhs)
}

/// Coexistence of two observables on one model.
///
/// Polyhedral models are decided by LP. On a PSD model only the diagonal
/// witness (for `A = B`) and the product candidates `Aₓ^{1/2} Bᵧ Aₓ^{1/2}`
/// and `Bᵧ^{1/2} Aₓ Bᵧ^{1/2}` are tried; anything else is undecided.
pub fn observables_coexist(a: &Observable, b: &Observable) -> Result<Coexistence<BiObservable>> {
    if !ConeModel::same(&a.model, &b.model) {
        return Err(Error::ModelMismatch);
    }
    let model = &a.model;
    if a.same_effects(b, model.tol()) {
        let mut c = BiObservable::diagonal(a);
        c.cols = b.outcomes.clone();
        return Ok(Coexistence::Compatible(c));
    }
    match model.kind() {
        ConeKind::Polyhedral { .. } => {
            let p = joint_observable_problem(a, b)?;
            match solve_feasibility(&p)? {
                Feasibility::Feasible(x) => {
                    let d = model.dim();
                    let cells = x
                        .chunks(d)
                        .map(|c| Effect::from_parts(model, ConeVector::from_column_slice(c)))
                        .collect();
                    let c = BiObservable::from_parts(model, a.outcomes.clone(), b.outcomes.clone(), cells);
                    Ok(Coexistence::Compatible(c))
                }
                Feasibility::Infeasible(cert) => Ok(Coexistence::Incompatible(cert)),
            }
        }
        ConeKind::Psd { .. } => {
            let h = HilbertModel::from_model(model)?;
            for (outer, inner, transpose) in [(a, b, false), (b, a, true)] {
                let mut cells = vec![Effect::zero(model); a.len() * b.len()];
                for (i, o) in outer.effects.iter().enumerate() {
                    let root = matrix_sqrt_with_tol(&h.matrix(o.vector()), model.tol())?;
                    for (j, e) in inner.effects.iter().enumerate() {
                        let m = &root * h.matrix(e.vector()) * &root;
                        let (x, y) = if transpose { (j, i) } else { (i, j) };
                        cells[x * b.len() + y] =
                            Effect::from_parts(model, crate::cone::hermitian_to_coords(&m));
                    }
                }
                let c = BiObservable::from_parts(model, a.outcomes.clone(), b.outcomes.clone(), cells);
                if verify_joint(a, b, &c) {
                    return Ok(Coexistence::Compatible(c));
                }
            }
            Ok(Coexistence::Undecided(
                "deciding coexistence on a PSD cone is a semidefinite program; no product candidate works".into(),
            ))
        }
    }
}

/// `C` is a joint bi-observable for `A` and `B`: its marginals match to
/// [`JOINT_TOL`] and every cell lies in the cone.
pub fn verify_joint(a: &Observable, b: &Observable, c: &BiObservable) -> bool {
    if !ConeModel::same(&a.model, &c.model) || !ConeModel::same(&b.model, &c.model) {
        return false;
    }
    if c.rows.len() != a.len() || c.cols.len() != b.len() {
        return false;
    }
    let (m1, m2) = c.marginals();
    m1.same_effects(a, JOINT_TOL)
        && m2.same_effects(b, JOINT_TOL)
        && c.cells.iter().all(|e| c.model.cone_margin(e.vector()) >= -c.model.tol())
}
