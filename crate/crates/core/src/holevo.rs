//! Measure-and-prepare operations `H^(a,β)(α) = α(a)β`, their mixtures and
//! instruments, the product `a[β]b = β(b)a` and the α-commutant.

use serde::Serialize;

use crate::cone::{ConeModel, ConeVector, Effect, Model};
use crate::error::{Error, Result};
use crate::instruments::{compose_instruments, BiInstrument, Instrument};
use crate::observables::{BiObservable, Observable};
use crate::operations::Operation;
use crate::states::{max_over_states, Functional, State};

/// Relative singular-value threshold of the purity test.
pub const RANK_TOL: f64 = 1e-8;

/// `H^(a,β)`, with rank-one dual `b ↦ β(b)a`.
pub fn pure_holevo(a: &Effect, beta: &State) -> Operation {
    Operation::from_parts(a.model(), beta.model(), a.vector() * beta.covector().transpose())
}

/// `Σᵢ H^(aᵢ,βᵢ)`; requires `Σ aᵢ ≤ u₁`.
pub fn mixed_holevo(terms: &[(Effect, State)]) -> Result<Operation> {
    let (a0, b0) = terms
        .first()
        .ok_or_else(|| Error::InvalidOperation("a mixed Holevo operation needs at least one term".into()))?;
    let (source, target) = (a0.model(), b0.model());
    let mut total = source.zero();
    let mut dual = nalgebra::DMatrix::zeros(source.dim(), target.dim());
    for (a, b) in terms {
        if !ConeModel::same(a.model(), source) || !ConeModel::same(b.model(), target) {
            return Err(Error::ModelMismatch);
        }
        total += a.vector();
        dual += a.vector() * b.covector().transpose();
    }
    let slack = source.cone_margin(&(source.unit() - &total));
    if slack < -source.tol() * terms.len() as f64 {
        return Err(Error::InvalidOperation(format!("Σ aᵢ exceeds the unit (margin {slack:e})")));
    }
    Ok(Operation::from_parts(source, target, dual))
}

/// Result of testing whether an operation is a single `H^(b,β)`.
#[derive(Debug, Clone)]
pub enum Purity {
    Pure { effect: Effect, state: State },
    NotPure { rank: usize, singular_values: Vec<f64> },
}

impl Purity {
    pub fn is_pure(&self) -> bool {
        matches!(self, Purity::Pure { .. })
    }
}

/// An operation is pure Holevo iff its dual matrix has rank at most one and
/// the rank-one factors can be normalized to an effect and a state.
pub fn is_pure_representable(op: &Operation) -> Result<Purity> {
    let d = op.dual_matrix();
    let svd = d.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(Purity::Pure { effect: Effect::zero(op.source()), state: State::barycenter(op.target()) });
    }
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    let refute = |rank| Purity::NotPure { rank, singular_values: sv.clone() };
    if rank > 1 {
        return Ok(refute(rank));
    }
    let i = sv.iter().position(|&s| s == top).expect("top singular value");
    let u = svd.u.as_ref().expect("requested U").column(i).into_owned();
    let v = svd.v_t.as_ref().expect("requested Vᵀ").row(i).transpose();
    let norm = v.dot(op.target().unit());
    if norm.abs() <= RANK_TOL * top {
        return Ok(refute(rank));
    }
    let beta = State::new(op.target(), &v / norm);
    let effect = Effect::new(op.source(), &u * (top * norm));
    match (effect, beta) {
        (Ok(effect), Ok(state)) => Ok(Purity::Pure { effect, state }),
        _ => Ok(refute(rank)),
    }
}

/// `a[β]b = β(b)a`.
pub fn holevo_seq_effects(a: &Effect, beta: &State, b: &Effect) -> Result<Effect> {
    let p = beta.evaluate(b)?;
    Ok(Effect::from_parts(a.model(), a.vector() * p))
}

fn check_table(a: &Observable, betas: &[State]) -> Result<Model> {
    if a.len() != betas.len() {
        return Err(Error::InvalidInstrument(format!(
            "{} outcomes but {} states",
            a.len(),
            betas.len()
        )));
    }
    let target = betas[0].model().clone();
    if betas.iter().any(|b| !ConeModel::same(b.model(), &target)) {
        return Err(Error::ModelMismatch);
    }
    Ok(target)
}

/// `Iₓ = H^(Aₓ,βₓ)`.
pub fn pure_holevo_instrument(a: &Observable, betas: &[State]) -> Result<Instrument> {
    check_table(a, betas)?;
    let ops = a.effects().iter().zip(betas).map(|(e, b)| pure_holevo(e, b)).collect();
    Instrument::new(a.outcomes().to_vec(), ops)
}

/// `Iₓ = Σᵢ λᵢ H^(A_{ix}, β_{ix})` for observables sharing one outcome set.
pub fn mixed_holevo_instrument(weights: &[f64], observables: &[Observable], tables: &[Vec<State>]) -> Result<Instrument> {
    let n = weights.len();
    if n == 0 || observables.len() != n || tables.len() != n {
        return Err(Error::InvalidInstrument(format!(
            "{n} weights, {} observables, {} state tables",
            observables.len(),
            tables.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidWeights(format!("weight {w} outside [0, 1]")));
    }
    let total: f64 = weights.iter().sum();
    let model = observables[0].model();
    if (total - 1.0).abs() > model.tol() {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let outcomes = observables[0].outcomes();
    if observables.iter().any(|o| o.outcomes() != outcomes) {
        return Err(Error::InvalidInstrument("observables must share one outcome set".into()));
    }
    let target = check_table(&observables[0], &tables[0])?;
    let mut duals = vec![nalgebra::DMatrix::zeros(model.dim(), target.dim()); outcomes.len()];
    for ((w, obs), table) in weights.iter().zip(observables).zip(tables) {
        if !ConeModel::same(obs.model(), model) || !ConeModel::same(&check_table(obs, table)?, &target) {
            return Err(Error::ModelMismatch);
        }
        for (x, (e, b)) in obs.effects().iter().zip(table).enumerate() {
            duals[x] += e.vector() * b.covector().transpose() * *w;
        }
    }
    let ops = duals.into_iter().map(|d| Operation::from_parts(model, &target, d)).collect();
    Instrument::new(outcomes.to_vec(), ops)
}

/// `(A∘B)ₓᵧ = βₓ(Bᵧ)Aₓ`, the product measured by `H^(A,β)` followed by `B`.
pub fn holevo_seq_observables(a: &Observable, betas: &[State], b: &Observable) -> Result<BiObservable> {
    let target = check_table(a, betas)?;
    if !ConeModel::same(b.model(), &target) {
        return Err(Error::ModelMismatch);
    }
    let mut cells = Vec::with_capacity(a.len() * b.len());
    for (e, beta) in a.effects().iter().zip(betas) {
        for f in b.effects() {
            cells.push(holevo_seq_effects(e, beta, f)?);
        }
    }
    BiObservable::new(a.model(), a.outcomes().to_vec(), b.outcomes().to_vec(), cells)
}

/// The composed instrument `H^(A,α)∘H^(B,β)` together with the three closed
/// forms it is expected to match.
#[derive(Debug, Clone)]
pub struct ComposeIdentity {
    pub composed: BiInstrument,
    /// `H^(A∘B, β′)` with `β′ₓᵧ = βᵧ`.
    pub expected: BiInstrument,
    /// `δₓ = Σᵧ αₓ(Bᵧ)βᵧ`.
    pub delta: Vec<State>,
    /// `Cᵧ = Σₓ αₓ(Bᵧ)Aₓ`.
    pub c: Observable,
    pub composed_deviation: f64,
    /// Deviation of the first marginal from `H^(A,δ)`.
    pub first_marginal_deviation: f64,
    /// Deviation of the second marginal from `H^(C,β)`.
    pub second_marginal_deviation: f64,
}

impl ComposeIdentity {
    pub fn max_deviation(&self) -> f64 {
        self.composed_deviation
            .max(self.first_marginal_deviation)
            .max(self.second_marginal_deviation)
    }
}

/// Compares `H^(A,α)∘H^(B,β)` (`A` on `E₁`, `α` and `B` on `E₂`, `β` on `E₃`)
/// with its closed forms.
pub fn holevo_compose_identity(a: &Observable, alphas: &[State], b: &Observable, betas: &[State]) -> Result<ComposeIdentity> {
    let first = pure_holevo_instrument(a, alphas)?;
    let second = pure_holevo_instrument(b, betas)?;
    let composed = compose_instruments(&first, &second)?;

    let ab = holevo_seq_observables(a, alphas, b)?;
    let nb = b.len();
    let expected_cells = ab
        .cells()
        .iter()
        .enumerate()
        .map(|(k, e)| pure_holevo(e, &betas[k % nb]))
        .collect();
    let expected = BiInstrument::new(a.outcomes().to_vec(), b.outcomes().to_vec(), expected_cells)?;
    let composed_deviation = composed
        .cells()
        .iter()
        .zip(expected.cells())
        .map(|(p, q)| p.distance(q))
        .fold(0.0, f64::max);

    let target = betas[0].model();
    let delta = alphas
        .iter()
        .map(|alpha| {
            let cov = b
                .effects()
                .iter()
                .zip(betas)
                .fold(ConeVector::zeros(target.dim()), |acc, (e, beta)| acc + beta.covector() * alpha.pair(e.vector()));
            State::new(target, cov)
        })
        .collect::<Result<Vec<_>>>()?;
    let (m1, m2) = composed.marginals();
    let first_marginal_deviation = m1.distance(&pure_holevo_instrument(a, &delta)?);
    let c = ab.marginals().1;
    let second_marginal_deviation = m2.distance(&pure_holevo_instrument(&c, betas)?);
    Ok(ComposeIdentity {
        composed,
        expected,
        delta,
        c,
        composed_deviation,
        first_marginal_deviation,
        second_marginal_deviation,
    })
}

/// `[a,b]_α = α(b)a − α(a)b`, a vector of `V` that need not lie in `K`.
pub fn commutant(alpha: &State, a: &Effect, b: &Effect) -> Result<ConeVector> {
    if !ConeModel::same(alpha.model(), a.model()) || !ConeModel::same(a.model(), b.model()) {
        return Err(Error::ModelMismatch);
    }
    Ok(a.vector() * alpha.pair(b.vector()) - b.vector() * alpha.pair(a.vector()))
}

/// Evaluations of the product laws for `a[β]b` on one triple of effects and
/// two states. Conditional laws whose hypothesis fails are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProductLaws {
    /// `(a+b)[β]c = a[β]c + b[β]c` when `a ⊥ b`
    pub additive_left: Option<bool>,
    /// `a[β](b+c) = a[β]b + a[β]c` when `b ⊥ c`
    pub additive_right: Option<bool>,
    /// `(λa)[β]b = a[β](λb) = λ(a[β]b)`
    pub homogeneous: bool,
    /// `θ[β]b = b[β]θ = θ`
    pub zero: bool,
    /// `a[β]u = a` and `u[β]b = β(b)u`
    pub unit: bool,
    /// `a[β]b ≤ a`
    pub below_first: bool,
    /// `a[α](b[β]c) = (a[α]b)[β]c`
    pub associative: bool,
}

impl ProductLaws {
    pub fn all_hold(&self) -> bool {
        self.additive_left.unwrap_or(true)
            && self.additive_right.unwrap_or(true)
            && self.homogeneous
            && self.zero
            && self.unit
            && self.below_first
            && self.associative
    }
}

const LAMBDA: f64 = 0.37;

pub fn product_laws(alpha: &State, beta: &State, a: &Effect, b: &Effect, c: &Effect, tol: f64) -> Result<ProductLaws> {
    let model = a.model();
    for m in [alpha.model(), beta.model(), b.model(), c.model()] {
        if !ConeModel::same(m, model) {
            return Err(Error::ModelMismatch);
        }
    }
    let prod = |x: &Effect, s: &State, y: &Effect| holevo_seq_effects(x, s, y);
    let close = |x: &Effect, y: &Effect| x.distance(y) <= tol;
    let zero = Effect::zero(model);
    let unit = Effect::unit(model);

    let additive_left = if a.perp(b)? {
        let lhs = prod(&Effect::from_parts(model, a.vector() + b.vector()), beta, c)?;
        let rhs = Effect::from_parts(model, prod(a, beta, c)?.vector() + prod(b, beta, c)?.vector());
        Some(close(&lhs, &rhs))
    } else {
        None
    };
    let additive_right = if b.perp(c)? {
        let lhs = prod(a, beta, &Effect::from_parts(model, b.vector() + c.vector()))?;
        let rhs = Effect::from_parts(model, prod(a, beta, b)?.vector() + prod(a, beta, c)?.vector());
        Some(close(&lhs, &rhs))
    } else {
        None
    };
    let ab = prod(a, beta, b)?;
    let scaled = ab.scale(LAMBDA)?;
    let homogeneous = close(&prod(&a.scale(LAMBDA)?, beta, b)?, &scaled) && close(&prod(a, beta, &b.scale(LAMBDA)?)?, &scaled);
    let zero_law = prod(&zero, beta, b)?.distance(&zero) <= tol && prod(b, beta, &zero)?.distance(&zero) <= tol;
    let unit_law = close(&prod(a, beta, &unit)?, a)
        && close(&prod(&unit, beta, b)?, &Effect::from_parts(model, model.unit() * beta.pair(b.vector())));
    let below_first = model.cone_margin(&(a.vector() - ab.vector())) >= -tol;
    let associative = close(&prod(a, alpha, &prod(b, beta, c)?)?, &prod(&prod(a, alpha, b)?, beta, c)?);
    Ok(ProductLaws {
        additive_left,
        additive_right,
        homogeneous,
        zero: zero_law,
        unit: unit_law,
        below_first,
        associative,
    })
}

/// Evaluations of the α-commutant laws on one triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CommutantLaws {
    /// `[a,c]_α = θ ⇒ [a[α]b, c]_α = θ` (vacuously true when `[a,c]_α ≠ θ`)
    pub zero_propagates: bool,
    /// `[a+b,c]_α = [a,c]_α + [b,c]_α` when `a ⊥ b`
    pub additive: Option<bool>,
    /// `[a,u]_α = a − α(a)u`, nonzero exactly when `a ≠ α(a)u`
    pub unit_commutant: bool,
    /// When `a ≠ α(a)u`: `[a,θ]_α = θ` while `[a,θ′]_α ≠ θ`
    pub complement_fails: Option<bool>,
    /// `[a,b]_α = −[b,a]_α`
    pub antisymmetric: bool,
    /// `[λa,b]_α = λ[a,b]_α`
    pub homogeneous: bool,
    /// `[a,a]_α = θ`
    pub self_zero: bool,
    /// `α([a,b]_α) = 0`
    pub annihilated_by_state: bool,
}

impl CommutantLaws {
    pub fn all_hold(&self) -> bool {
        self.zero_propagates
            && self.additive.unwrap_or(true)
            && self.unit_commutant
            && self.complement_fails.unwrap_or(true)
            && self.antisymmetric
            && self.homogeneous
            && self.self_zero
            && self.annihilated_by_state
    }
}

pub fn commutant_laws(alpha: &State, a: &Effect, b: &Effect, c: &Effect, tol: f64) -> Result<CommutantLaws> {
    let model = a.model();
    let com = |x: &Effect, y: &Effect| commutant(alpha, x, y);
    let is_zero = |v: &ConeVector| v.amax() <= tol;
    let unit = Effect::unit(model);
    let zero = Effect::zero(model);

    let ac = com(a, c)?;
    let zero_propagates = !is_zero(&ac) || is_zero(&com(&holevo_seq_effects(a, alpha, b)?, c)?);
    let additive = if a.perp(b)? {
        let lhs = com(&Effect::from_parts(model, a.vector() + b.vector()), c)?;
        Some(is_zero(&(lhs - &ac - com(b, c)?)))
    } else {
        None
    };
    let au = com(a, &unit)?;
    let closed = a.vector() - model.unit() * alpha.pair(a.vector());
    let central = is_zero(&closed);
    let unit_commutant = is_zero(&(&au - &closed)) && (is_zero(&au) == central);
    let with_zero = is_zero(&com(a, &zero)?);
    let with_unit = is_zero(&com(a, &zero.complement())?);
    let complement_fails = (!central).then_some(with_zero && !with_unit);
    let ab = com(a, b)?;
    let antisymmetric = is_zero(&(&ab + com(b, a)?));
    let homogeneous = is_zero(&(com(&a.scale(LAMBDA)?, b)? - &ab * LAMBDA));
    let self_zero = is_zero(&com(a, a)?);
    let annihilated_by_state = alpha.pair(&ab).abs() <= tol;
    Ok(CommutantLaws {
        zero_propagates,
        additive,
        unit_commutant,
        complement_fails,
        antisymmetric,
        homogeneous,
        self_zero,
        annihilated_by_state,
    })
}

/// Heuristic search for a rewrite `Σ aᵢ ⊗ βᵢ = Σ λᵢ H^(bᵢ,βᵢ)` with `Σλᵢ = 1`
/// along the given terms, after merging terms that share a state. Succeeds
/// iff `Σᵢ maxₛ s(aᵢ) ≤ 1`; a `None` proves nothing about other
/// decompositions.
pub fn search_pure_mixture(terms: &[(Effect, State)]) -> Result<Option<Vec<(f64, Effect, State)>>> {
    let mut merged: Vec<(ConeVector, State)> = Vec::new();
    for (a, beta) in terms {
        match merged.iter_mut().find(|(_, s)| s.distance(beta) <= beta.model().tol()) {
            Some((acc, _)) => *acc += a.vector(),
            None => merged.push((a.vector().clone(), beta.clone())),
        }
    }
    let Some(model) = terms.first().map(|(a, _)| a.model().clone()) else {
        return Ok(None);
    };
    let mut lambdas = Vec::with_capacity(merged.len());
    for (v, _) in &merged {
        lambdas.push(max_over_states(&Effect::from_parts(&model, v.clone()))?.max(0.0));
    }
    let total: f64 = lambdas.iter().sum();
    if total > 1.0 + model.tol() || total <= 0.0 {
        return Ok(None);
    }
    let scale = 1.0 / total;
    merged
        .into_iter()
        .zip(lambdas)
        .filter(|(_, l)| *l > 0.0)
        .map(|((v, beta), l)| {
            let lambda = l * scale;
            Ok((lambda, Effect::new(&model, v / lambda)?, beta))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::HilbertModel;

    fn classical() -> Model {
        ConeModel::orthant(2).unwrap()
    }

    fn e(m: &Model, xs: &[f64]) -> Effect {
        Effect::from_slice(m, xs).unwrap()
    }

    fn s(m: &Model, xs: &[f64]) -> State {
        State::from_slice(m, xs).unwrap()
    }

    #[test]
    fn pure_holevo_examples() {
        let m = classical();
        let a = e(&m, &[0.6, 0.2]);
        let beta = s(&m, &[0.3, 0.7]);
        let op = pure_holevo(&a, &beta);
        let alpha = s(&m, &[0.5, 0.5]);
        // α(a)β = 0.4β
        assert!((op.apply(&alpha).unwrap().covector() - beta.covector() * 0.4).amax() < 1e-15);
        assert!(op.measured_effect().approx_eq(&a, 1e-15));
        assert!(pure_holevo(&Effect::unit(&m), &beta).distance(&Operation::constant_channel(&m, &beta)) == 0.0);
        assert!(pure_holevo(&Effect::zero(&m), &beta).distance(&Operation::zero(&m, &m)) == 0.0);
    }

    #[test]
    fn mixtures_collapse() {
        let m = ConeModel::orthant(3).unwrap();
        let a1 = e(&m, &[0.2, 0.6, 0.1]);
        let a2 = e(&m, &[0.7, 0.3, 0.5]);
        let b1 = s(&m, &[0.2, 0.3, 0.5]);
        let b2 = s(&m, &[0.6, 0.1, 0.3]);
        let lam = 0.3;
        let shared_state = mixed_holevo(&[(a1.scale(lam).unwrap(), b1.clone()), (a2.scale(1.0 - lam).unwrap(), b1.clone())]).unwrap();
        let collapsed = pure_holevo(&Effect::new(&m, a1.vector() * lam + a2.vector() * (1.0 - lam)).unwrap(), &b1);
        assert!(shared_state.distance(&collapsed) < 1e-15);
        let shared_effect = mixed_holevo(&[(a1.scale(lam).unwrap(), b1.clone()), (a1.scale(1.0 - lam).unwrap(), b2.clone())]).unwrap();
        let mix = State::new(&m, b1.covector() * lam + b2.covector() * (1.0 - lam)).unwrap();
        assert!(shared_effect.distance(&pure_holevo(&a1, &mix)) < 1e-15);
        assert!(is_pure_representable(&shared_state).unwrap().is_pure());
        let too_big = mixed_holevo(&[(a2.clone(), b1.clone()), (a2, b2)]);
        assert!(too_big.is_err());
    }

    #[test]
    fn purity_factorization() {
        let m = classical();
        let a = e(&m, &[0.6, 0.2]);
        let beta = s(&m, &[0.3, 0.7]);
        let Purity::Pure { effect, state } = is_pure_representable(&pure_holevo(&a, &beta)).unwrap() else {
            panic!("pure")
        };
        assert!(effect.approx_eq(&a, 1e-12) && state.distance(&beta) < 1e-12);
        assert!(is_pure_representable(&Operation::zero(&m, &m)).unwrap().is_pure());
        let id = Operation::identity(&m);
        assert!(matches!(is_pure_representable(&id).unwrap(), Purity::NotPure { rank: 2, .. }));
    }

    #[test]
    fn qubit_mixture_that_is_not_pure() {
        let h = HilbertModel::new(2).unwrap();
        let a = h.basis_projector(0);
        let b1 = State::new(h.model(), h.basis_projector(0).into_vector()).unwrap();
        let b2 = State::new(h.model(), h.basis_projector(1).into_vector()).unwrap();
        assert!((b1.evaluate(&a).unwrap() - 1.0).abs() < 1e-15);
        assert!((b2.evaluate(&a.complement()).unwrap() - 1.0).abs() < 1e-15);
        let op = mixed_holevo(&[(a.scale(0.5).unwrap(), b1), (a.complement().scale(0.5).unwrap(), b2)]).unwrap();
        assert!(matches!(is_pure_representable(&op).unwrap(), Purity::NotPure { rank: 2, .. }));
    }

    #[test]
    fn seq_effects_examples() {
        let m = classical();
        let a = e(&m, &[0.6, 0.2]);
        let b = e(&m, &[0.1, 0.9]);
        let beta = s(&m, &[0.3, 0.7]);
        assert!(holevo_seq_effects(&a, &beta, &Effect::unit(&m)).unwrap().approx_eq(&a, 1e-15));
        assert!(holevo_seq_effects(&Effect::zero(&m), &beta, &b).unwrap().is_zero());
        let laws = product_laws(&s(&m, &[0.5, 0.5]), &beta, &a, &b, &e(&m, &[0.2, 0.05]), 1e-12).unwrap();
        assert!(laws.all_hold(), "{laws:?}");
    }

    #[test]
    fn product_is_not_symmetric_in_zero() {
        // u[α]b = α(b)u = θ while b[α]u = b ≠ θ
        let m = classical();
        let alpha = s(&m, &[1.0, 0.0]);
        let b = e(&m, &[0.0, 0.5]);
        assert!(holevo_seq_effects(&Effect::unit(&m), &alpha, &b).unwrap().is_zero());
        assert!(!holevo_seq_effects(&b, &alpha, &Effect::unit(&m)).unwrap().is_zero());
    }

    #[test]
    fn holevo_instrument_and_mixture() {
        let m = classical();
        let a = Observable::from_effects(&m, vec![e(&m, &[0.8, 0.3]), e(&m, &[0.2, 0.7])]).unwrap();
        let betas = vec![s(&m, &[0.9, 0.1]), s(&m, &[0.4, 0.6])];
        let inst = pure_holevo_instrument(&a, &betas).unwrap();
        assert!(inst.measured_observable().approx_eq(&a, 1e-15));
        let b = Observable::from_effects(&m, vec![e(&m, &[0.1, 0.4]), e(&m, &[0.9, 0.6])]).unwrap();
        let mixed = mixed_holevo_instrument(&[0.25, 0.75], &[a.clone(), b.clone()], &[betas.clone(), betas.clone()]).unwrap();
        // Î = 0.25A + 0.75B
        let want = a.effects()[0].vector() * 0.25 + b.effects()[0].vector() * 0.75;
        assert!((mixed.measured_observable().effects()[0].vector() - want).amax() < 1e-15);
        let one = mixed_holevo_instrument(&[1.0], &[a.clone()], &[betas.clone()]).unwrap();
        assert!(one.distance(&inst) < 1e-15);
        assert!(mixed_holevo_instrument(&[0.5, 0.6], &[a.clone(), b], &[betas.clone(), betas]).is_err());
    }

    #[test]
    fn compose_identity_classical() {
        let m = classical();
        let a = Observable::from_effects(&m, vec![e(&m, &[0.8, 0.3]), e(&m, &[0.2, 0.7])]).unwrap();
        let alphas = vec![s(&m, &[0.9, 0.1]), s(&m, &[0.4, 0.6])];
        let b = Observable::from_effects(&m, vec![e(&m, &[0.1, 0.4]), e(&m, &[0.9, 0.6])]).unwrap();
        let betas = vec![s(&m, &[0.2, 0.8]), s(&m, &[0.7, 0.3])];
        let rep = holevo_compose_identity(&a, &alphas, &b, &betas).unwrap();
        assert!(rep.max_deviation() < 1e-12, "{}", rep.max_deviation());
        let seq = holevo_seq_observables(&a, &alphas, &b).unwrap();
        assert!(seq.marginals().0.approx_eq(&a, 1e-15));
    }

    #[test]
    fn commutant_examples() {
        let m = classical();
        let alpha = s(&m, &[0.5, 0.5]);
        let a = e(&m, &[1.0, 0.0]);
        let b = e(&m, &[0.0, 1.0]);
        assert_eq!(commutant(&alpha, &a, &b).unwrap().as_slice(), &[0.5, -0.5]);
        assert!(commutant(&alpha, &a, &a).unwrap().amax() == 0.0);
        let laws = commutant_laws(&alpha, &a, &b, &e(&m, &[0.3, 0.6]), 1e-12).unwrap();
        assert!(laws.all_hold(), "{laws:?}");
        assert_eq!(laws.complement_fails, Some(true));
        let central = Effect::unit(&m).scale(0.4).unwrap();
        let laws = commutant_laws(&alpha, &central, &b, &a, 1e-12).unwrap();
        assert_eq!(laws.complement_fails, None);
        assert!(laws.all_hold());
    }

    #[test]
    fn mixture_search() {
        let m = classical();
        let b1 = s(&m, &[1.0, 0.0]);
        let b2 = s(&m, &[0.0, 1.0]);
        let terms = vec![(e(&m, &[0.5, 0.0]), b1.clone()), (e(&m, &[0.0, 0.5]), b2.clone())];
        let found = search_pure_mixture(&terms).unwrap().expect("a rewrite exists");
        let total: f64 = found.iter().map(|t| t.0).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let rebuilt = mixed_holevo(&found.iter().map(|(l, b, s)| (b.scale(*l).unwrap(), s.clone())).collect::<Vec<_>>()).unwrap();
        assert!(rebuilt.distance(&mixed_holevo(&terms).unwrap()) < 1e-12);
        let heavy = vec![(e(&m, &[0.6, 0.3]), b1), (e(&m, &[0.2, 0.7]), b2)];
        assert!(search_pure_mixture(&heavy).unwrap().is_none());
    }
}
