//! States and substates: positive linear functionals on `V` stored as
//! covectors, with `s(u) = 1` (states) or `s(u) ≤ 1` (substates).
//!
//! On the PSD backend the covector of a state is the coordinate vector of its
//! density matrix, and pairing is the Born rule `tr(ρa)`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cone::{coords_to_hermitian, hermitian_to_coords, ConeKind, ConeModel, ConeVector, Effect, Model};
use crate::error::{check_dim, Error, Result};
use crate::feasibility::{solve_feasibility, ConeBlock, LpProblem};

/// Vertices closer than this are identified during enumeration.
pub const VERTEX_DEDUP_TOL: f64 = 1e-7;

/// Anything that pairs with vectors of `V` through a covector.
pub trait Functional {
    fn model(&self) -> &Model;
    fn covector(&self) -> &ConeVector;

    /// Raw pairing with an arbitrary vector of `V`.
    fn pair(&self, x: &ConeVector) -> f64 {
        self.covector().dot(x)
    }

    /// `s(a)`, clamped to `[0, 1]`.
    fn evaluate(&self, a: &Effect) -> Result<f64> {
        if !ConeModel::same(self.model(), a.model()) {
            return Err(Error::ModelMismatch);
        }
        Ok(self.pair(a.vector()).clamp(0.0, 1.0))
    }

    /// `s(u)`.
    fn mass(&self) -> f64 {
        self.pair(self.model().unit())
    }
}

fn positivity_margin(model: &ConeModel, covector: &ConeVector) -> f64 {
    match model.kind() {
        ConeKind::Polyhedral { generators, .. } => generators
            .iter()
            .map(|g| covector.dot(g))
            .fold(f64::INFINITY, f64::min),
        // the covector is the coordinate vector of the density matrix
        ConeKind::Psd { .. } => model.cone_margin(covector),
    }
}

#[derive(Debug, Clone)]
pub struct State {
    model: Model,
    covector: ConeVector,
}

impl State {
    pub fn new(model: &Model, covector: ConeVector) -> Result<Self> {
        check_dim(model.dim(), covector.len())?;
        let tol = model.tol();
        let pos = positivity_margin(model, &covector);
        if pos < -tol {
            return Err(Error::NotAState(format!("negative on the cone (margin {pos:e})")));
        }
        let mass = covector.dot(model.unit());
        if (mass - 1.0).abs() > tol {
            return Err(Error::NotAState(format!("s(u) = {mass}, expected 1")));
        }
        Ok(State { model: model.clone(), covector })
    }

    pub fn from_slice(model: &Model, coords: &[f64]) -> Result<Self> {
        Self::new(model, ConeVector::from_column_slice(coords))
    }

    /// A canonical interior state: `I/n` on the PSD backend, the barycenter of
    /// the vertex states on a polyhedral model.
    pub fn barycenter(model: &Model) -> State {
        match model.kind() {
            ConeKind::Psd { hilbert_dim } => {
                let n = *hilbert_dim;
                let rho = DMatrix::<Complex64>::identity(n, n) / Complex64::new(n as f64, 0.0);
                State { model: model.clone(), covector: hermitian_to_coords(&rho) }
            }
            ConeKind::Polyhedral { .. } => {
                let vs = state_vertices(model).expect("polyhedral model");
                let sum = vs.iter().fold(model.zero(), |acc, s| acc + &s.covector);
                State { model: model.clone(), covector: sum / vs.len() as f64 }
            }
        }
    }

    pub fn as_substate(&self) -> SubState {
        SubState { model: self.model.clone(), covector: self.covector.clone() }
    }

    pub fn distance(&self, other: &State) -> f64 {
        (&self.covector - &other.covector).amax()
    }
}

impl Functional for State {
    fn model(&self) -> &Model {
        &self.model
    }
    fn covector(&self) -> &ConeVector {
        &self.covector
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        ConeModel::same(&self.model, &other.model) && self.covector == other.covector
    }
}

/// `λs` for a state `s` and `λ ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct SubState {
    model: Model,
    covector: ConeVector,
}

impl SubState {
    pub fn new(model: &Model, covector: ConeVector) -> Result<Self> {
        check_dim(model.dim(), covector.len())?;
        let tol = model.tol();
        let pos = positivity_margin(model, &covector);
        if pos < -tol {
            return Err(Error::NotAState(format!("negative on the cone (margin {pos:e})")));
        }
        let mass = covector.dot(model.unit());
        if mass < -tol || mass > 1.0 + tol {
            return Err(Error::NotAState(format!("substate mass {mass} outside [0, 1]")));
        }
        Ok(SubState { model: model.clone(), covector })
    }

    pub(crate) fn from_parts(model: &Model, covector: ConeVector) -> Self {
        SubState { model: model.clone(), covector }
    }

    /// `s / s(u)`; fails when the mass is at most the model tolerance.
    pub fn normalize(&self) -> Result<State> {
        let mass = self.mass();
        if mass <= self.model.tol() {
            return Err(Error::ZeroProbability(mass));
        }
        State::new(&self.model, &self.covector / mass)
    }

    pub fn distance(&self, other: &SubState) -> f64 {
        (&self.covector - &other.covector).amax()
    }
}

impl Functional for SubState {
    fn model(&self) -> &Model {
        &self.model
    }
    fn covector(&self) -> &ConeVector {
        &self.covector
    }
}

/// `Σ λᵢ sᵢ` for weights in `[0, 1]` with `Σ λᵢ ≤ 1`.
pub fn mix_states(weights: &[f64], states: &[State]) -> Result<SubState> {
    if weights.len() != states.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} states",
            weights.len(),
            states.len()
        )));
    }
    let Some(first) = states.first() else {
        return Err(Error::InvalidWeights("no states to mix".into()));
    };
    let model = first.model.clone();
    let tol = model.tol();
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidWeights(format!("weight {w} outside [0, 1]")));
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + tol {
        return Err(Error::InvalidWeights(format!("weights sum to {total} > 1")));
    }
    let mut acc = model.zero();
    for (w, s) in weights.iter().zip(states) {
        if !ConeModel::same(&model, &s.model) {
            return Err(Error::ModelMismatch);
        }
        acc += &s.covector * *w;
    }
    Ok(SubState { model, covector: acc })
}

/// The extreme points of the state space `{s : s ≥ 0 on K, s(u) = 1}` of a
/// polyhedral model, found by enumerating basic solutions: every vertex is
/// the unique solution of `s·u = 1` together with `dim − 1` tight generator
/// constraints.
pub fn state_vertices(model: &Model) -> Result<Vec<State>> {
    let ConeKind::Polyhedral { generators, .. } = model.kind() else {
        return Err(Error::Unsupported(
            "the extreme states of a PSD model form a continuum".into(),
        ));
    };
    let d = model.dim();
    let tol = model.tol();
    let mut rhs = DVector::zeros(d);
    rhs[d - 1] = 1.0;
    let mut out: Vec<State> = Vec::new();
    for combo in (0..generators.len()).combinations(d - 1) {
        let m = DMatrix::from_fn(d, d, |i, j| {
            if i + 1 < d {
                generators[combo[i]][j]
            } else {
                model.unit()[j]
            }
        });
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 1e-10 * smax {
            continue;
        }
        let Some(s) = m.lu().solve(&rhs) else { continue };
        if generators.iter().any(|g| g.dot(&s) < -tol) {
            continue;
        }
        if out.iter().all(|v| (&v.covector - &s).amax() > VERTEX_DEDUP_TOL) {
            out.push(State { model: model.clone(), covector: s });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum StateSet {
    /// The entire state space of the model.
    Full,
    Finite(Vec<State>),
}

/// Whether `s(x) ≥ 0` for every `s` in the set forces `x ∈ K`.
///
/// A finite set is order-determining exactly when its covectors positively
/// span the dual cone, i.e. every facet of `K` is a nonnegative combination of
/// them; each facet is one LP. A finite set never positively spans the
/// (non-polyhedral) dual of a PSD cone of Hilbert dimension at least 2.
pub fn is_order_determining(set: &StateSet, model: &Model) -> Result<bool> {
    let states = match set {
        StateSet::Full => return Ok(true),
        StateSet::Finite(states) => states,
    };
    for s in states {
        if !ConeModel::same(model, &s.model) {
            return Err(Error::ModelMismatch);
        }
    }
    let facets = match model.kind() {
        ConeKind::Psd { hilbert_dim } => return Ok(*hilbert_dim == 1 && !states.is_empty()),
        ConeKind::Polyhedral { facets, .. } => facets,
    };
    if states.is_empty() {
        return Ok(false);
    }
    let d = model.dim();
    for f in facets {
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| states.iter().map(|s| s.covector[i]).collect())
            .collect();
        let p = LpProblem::new(vec![ConeBlock::orthant(states.len())], rows, f.iter().copied().collect())?;
        if !solve_feasibility(&p)?.is_feasible() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `max_{s ∈ S(E)} s(a)` together with a maximizing state.
///
/// Polyhedral models maximize over the vertex states; the PSD backend uses
/// the top eigenvector of `a`.
pub fn argmax_state(a: &Effect) -> Result<(f64, State)> {
    let model = a.model();
    match model.kind() {
        ConeKind::Polyhedral { .. } => {
            let vertices = state_vertices(model)?;
            let (value, best) = vertices
                .into_iter()
                .map(|s| (s.pair(a.vector()), s))
                .max_by(|x, y| x.0.total_cmp(&y.0))
                .ok_or_else(|| Error::InvalidModel("model has no states".into()))?;
            Ok((value, best))
        }
        ConeKind::Psd { hilbert_dim } => {
            let n = *hilbert_dim;
            let m = coords_to_hermitian(a.vector(), n);
            let eig = m.symmetric_eigen();
            let (idx, value) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("nonempty spectrum");
            let v = eig.eigenvectors.column(idx).into_owned();
            let rho = &v * v.adjoint();
            Ok((value, State { model: model.clone(), covector: hermitian_to_coords(&rho) }))
        }
    }
}

pub fn max_over_states(a: &Effect) -> Result<f64> {
    argmax_state(a).map(|(v, _)| v)
}
