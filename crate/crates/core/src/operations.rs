//! Operations between interval effect algebras.
//!
//! An operation `I : S(E₁) → Sub(S(E₂))` is stored as its dual linear map
//! `D = I* : V₂ → V₁`, a `dim₁ × dim₂` matrix. The forward action on a state
//! is `I(s) = s ∘ D`, so `s(I*(b)) = I(s)(b)` holds by construction and both
//! directions are exact matrix actions.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{hermitian_to_coords, ConeKind, ConeModel, ConeVector, Effect, Model};
use crate::error::{Error, Result};
use crate::hilbert::matrix_sqrt;
use crate::sample::random_pure_density;
use crate::states::{argmax_state, state_vertices, Functional, State, SubState};
use crate::cone::coords_to_hermitian;

/// Number of random pure states used to spot-check positivity on a PSD target.
pub const PSD_POSITIVITY_PROBES: usize = 100;
/// Number of random probes used by the repeatability conditions on PSD models.
pub const PSD_REPEATABILITY_PROBES: usize = 50;
/// Matching an operation's measured effect allows this multiple of the model
/// tolerance, since `D·u₂` carries one matrix-vector rounding.
pub const MEASURE_TOL_FACTOR: f64 = 10.0;

const PROBE_SEED: u64 = 0x5EED_0F_E4EC75;

pub(crate) fn probe_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(PROBE_SEED)
}

#[derive(Debug, Clone)]
pub struct Operation {
    source: Model,
    target: Model,
    dual: DMatrix<f64>,
}

impl Operation {
    /// Builds an operation from its dual matrix, checking positivity on the
    /// target cone and subunitality `D·u₂ ≤ u₁`.
    ///
    /// Positivity is exact on a polyhedral target (checked generator by
    /// generator). On a PSD target it is spot-checked on
    /// [`PSD_POSITIVITY_PROBES`] random pure states; such raw matrices are not
    /// checked for complete positivity.
    pub fn new(source: &Model, target: &Model, dual: DMatrix<f64>) -> Result<Self> {
        if dual.nrows() != source.dim() || dual.ncols() != target.dim() {
            return Err(Error::InvalidOperation(format!(
                "dual matrix is {}x{}, expected {}x{}",
                dual.nrows(),
                dual.ncols(),
                source.dim(),
                target.dim()
            )));
        }
        if dual.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperation("non-finite dual matrix entry".into()));
        }
        let op = Operation { source: source.clone(), target: target.clone(), dual };
        op.validate()?;
        Ok(op)
    }

    pub(crate) fn from_parts(source: &Model, target: &Model, dual: DMatrix<f64>) -> Self {
        Operation { source: source.clone(), target: target.clone(), dual }
    }

    fn validate(&self) -> Result<()> {
        let tol = self.source.tol();
        let check = |x: ConeVector, what: &str| -> Result<()> {
            let margin = self.source.cone_margin(&x);
            if margin < -tol {
                Err(Error::InvalidOperation(format!("not positive: {what} (margin {margin:e})")))
            } else {
                Ok(())
            }
        };
        match self.target.kind() {
            ConeKind::Polyhedral { generators, .. } => {
                for (i, g) in generators.iter().enumerate() {
                    check(&self.dual * g, &format!("image of generator {i} leaves the cone"))?;
                }
            }
            ConeKind::Psd { hilbert_dim } => {
                let mut rng = probe_rng();
                for _ in 0..PSD_POSITIVITY_PROBES {
                    let p = hermitian_to_coords(&random_pure_density(*hilbert_dim, &mut rng));
                    check(&self.dual * p, "image of a pure state leaves the cone")?;
                }
            }
        }
        let measured = &self.dual * self.target.unit();
        let slack = self.source.cone_margin(&(self.source.unit() - &measured));
        if slack < -tol {
            return Err(Error::InvalidOperation(format!(
                "not subunital: I*(u₂) exceeds u₁ (margin {slack:e})"
            )));
        }
        Ok(())
    }

    pub fn zero(source: &Model, target: &Model) -> Self {
        Self::from_parts(source, target, DMatrix::zeros(source.dim(), target.dim()))
    }

    pub fn identity(model: &Model) -> Self {
        Self::from_parts(model, model, DMatrix::identity(model.dim(), model.dim()))
    }

    /// The channel sending every state of `source` to `s2`; its dual is
    /// `b ↦ s₂(b)·u₁`.
    pub fn constant_channel(source: &Model, s2: &State) -> Self {
        let dual = source.unit() * s2.covector().transpose();
        Self::from_parts(source, s2.model(), dual)
    }

    pub fn source(&self) -> &Model {
        &self.source
    }

    pub fn target(&self) -> &Model {
        &self.target
    }

    pub fn dual_matrix(&self) -> &DMatrix<f64> {
        &self.dual
    }

    /// `I(s) = s ∘ I*`.
    pub fn apply<F: Functional>(&self, s: &F) -> Result<SubState> {
        if !ConeModel::same(s.model(), &self.source) {
            return Err(Error::ModelMismatch);
        }
        let covector = self.dual.tr_mul(s.covector());
        Ok(SubState::from_parts(&self.target, covector))
    }

    /// `I*(b)`.
    pub fn dual_apply(&self, b: &Effect) -> Result<Effect> {
        if !ConeModel::same(b.model(), &self.target) {
            return Err(Error::ModelMismatch);
        }
        Effect::new(&self.source, &self.dual * b.vector()).map_err(|e| {
            Error::InvalidOperation(format!("dual image is not an effect ({e}); the operation is corrupt"))
        })
    }

    /// The dual map on arbitrary vectors of `V₂`.
    pub fn dual_apply_vector(&self, x: &ConeVector) -> Result<ConeVector> {
        crate::error::check_dim(self.target.dim(), x.len())?;
        Ok(&self.dual * x)
    }

    /// `Î = I*(u₂)`.
    pub fn measured_effect(&self) -> Effect {
        Effect::from_parts(&self.source, &self.dual * self.target.unit())
    }

    /// `I*(u₂) = u₁` to the model tolerance.
    pub fn is_channel(&self) -> bool {
        (&self.dual * self.target.unit() - self.source.unit()).amax() <= self.source.tol()
    }

    /// `s′ = I(s) / s(Î)`.
    pub fn update_state(&self, s: &State) -> Result<State> {
        let out = self.apply(s)?;
        let p = out.mass();
        if p <= self.source.tol() {
            return Err(Error::ZeroProbability(p));
        }
        State::new(&self.target, out.covector() / p)
    }

    /// Checks that this operation measures `a`, returning the deviation.
    pub fn measures(&self, a: &Effect) -> Result<f64> {
        if !ConeModel::same(a.model(), &self.source) {
            return Err(Error::ModelMismatch);
        }
        let dev = (&self.dual * self.target.unit() - a.vector()).amax();
        if dev <= MEASURE_TOL_FACTOR * self.source.tol() {
            Ok(dev)
        } else {
            Err(Error::DoesNotMeasure(dev))
        }
    }

    /// The sequential product `a[I]b = I*(b)`, defined when `I` measures `a`.
    pub fn sequential_product(&self, a: &Effect, b: &Effect) -> Result<Effect> {
        self.measures(a)?;
        self.dual_apply(b)
    }

    /// `self` followed by `next`: `(I∘J)(s) = J(I(s))`, with dual `I*·J*`.
    pub fn compose(&self, next: &Operation) -> Result<Operation> {
        if !ConeModel::same(&self.target, &next.source) {
            return Err(Error::ModelMismatch);
        }
        Ok(Self::from_parts(&self.source, &next.target, &self.dual * &next.dual))
    }

    /// `λI` for `λ ∈ [0, 1]`.
    pub fn scale(&self, lambda: f64) -> Result<Operation> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::ScalarOutOfRange(lambda));
        }
        Ok(Self::from_parts(&self.source, &self.target, &self.dual * lambda))
    }

    /// `Σ Iᵢ`; fails unless the sum is again subunital.
    pub fn sum(ops: &[Operation]) -> Result<Operation> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidOperation("empty sum of operations".into()))?;
        let mut dual = DMatrix::zeros(first.dual.nrows(), first.dual.ncols());
        for op in ops {
            if !ConeModel::same(&op.source, &first.source) || !ConeModel::same(&op.target, &first.target) {
                return Err(Error::ModelMismatch);
            }
            dual += &op.dual;
        }
        let out = Self::from_parts(&first.source, &first.target, dual);
        let slack = out
            .source
            .cone_margin(&(out.source.unit() - &out.dual * out.target.unit()));
        if slack < -out.source.tol() * ops.len() as f64 {
            return Err(Error::InvalidOperation("the sum is not subunital".into()));
        }
        Ok(out)
    }

    /// Largest entrywise difference between dual matrices.
    pub fn distance(&self, other: &Operation) -> f64 {
        if self.dual.shape() != other.dual.shape() {
            return f64::INFINITY;
        }
        (&self.dual - &other.dual).amax()
    }

    /// `a` is `I`-repeatable: `I*(u) = I*(a) = a`.
    pub fn is_repeatable_via(&self, a: &Effect) -> Result<bool> {
        self.require_endo(a)?;
        let tol = MEASURE_TOL_FACTOR * self.source.tol();
        let du = &self.dual * self.source.unit();
        let da = &self.dual * a.vector();
        Ok((du - a.vector()).amax() <= tol && (da - a.vector()).amax() <= tol)
    }

    fn require_endo(&self, a: &Effect) -> Result<()> {
        if !ConeModel::same(&self.source, &self.target) {
            return Err(Error::Unsupported(
                "repeatability needs an operation from an effect algebra to itself".into(),
            ));
        }
        if !ConeModel::same(a.model(), &self.source) {
            return Err(Error::ModelMismatch);
        }
        Ok(())
    }

    /// Evaluates the six equivalent characterizations of `I`-repeatability
    /// independently. Every condition presupposes that `I` measures `a`.
    ///
    /// Universally quantified conditions run over finite batteries:
    /// effects orthogonal to `a` are the cone generators scaled below `a′`
    /// (polyhedral) or `a′^{1/2} P a′^{1/2}` for random pure `P` (PSD), always
    /// including `a′`; domination is tested on `u` and the scaled generators;
    /// state conditions run over the vertex states or random states.
    pub fn repeatability_conditions(&self, a: &Effect) -> Result<RepeatabilityConditions> {
        self.require_endo(a)?;
        let model = &self.source;
        let tol = MEASURE_TOL_FACTOR * model.tol();
        let u = model.unit();
        let d = &self.dual;
        let av = a.vector();
        let close = |x: &ConeVector, y: &ConeVector| (x - y).amax() <= tol;
        let is_zero = |x: &ConeVector| x.amax() <= tol;

        let du = d * u;
        let measures = close(&du, av);

        let da = d * av;
        let repeatable = measures && close(&da, av);
        // a[I]a = a
        let idempotent = measures && close(&da, av);
        let comp = u - av;
        let annihilates_complement = measures && is_zero(&(d * &comp));

        let (orthogonal, effects, states) = self.probe_batteries(a)?;
        let annihilates_orthogonal =
            measures && orthogonal.iter().all(|b| is_zero(&(d * b)));
        let dominated = measures
            && effects
                .iter()
                .all(|b| model.cone_margin(&(&da - d * b)) >= -tol);
        let stable_probability = measures
            && states.iter().all(|s| {
                let once = s.dot(&du);
                let twice = (d.tr_mul(s)).dot(&du);
                (once - twice).abs() <= tol
            });

        Ok(RepeatabilityConditions {
            repeatable,
            idempotent,
            annihilates_complement,
            annihilates_orthogonal,
            dominated,
            stable_probability,
        })
    }

    #[allow(clippy::type_complexity)]
    fn probe_batteries(&self, a: &Effect) -> Result<(Vec<ConeVector>, Vec<ConeVector>, Vec<ConeVector>)> {
        let model = &self.source;
        let u = model.unit();
        let comp = u - a.vector();
        let mut orthogonal = vec![comp.clone()];
        let mut effects = vec![u.clone(), model.zero(), a.vector().clone(), comp.clone()];
        let mut states = Vec::new();
        match model.kind() {
            ConeKind::Polyhedral { generators, facets } => {
                for g in generators {
                    // largest λ with λg ≤ a′
                    let lambda = facets
                        .iter()
                        .filter_map(|f| {
                            let fg = f.dot(g);
                            (fg > 0.0).then(|| (f.dot(&comp) / fg).max(0.0))
                        })
                        .fold(f64::INFINITY, f64::min);
                    if lambda.is_finite() && lambda > 0.0 {
                        orthogonal.push(g * lambda);
                    }
                    effects.push(g * model.max_scale_below_unit(g));
                }
                states.extend(state_vertices(model)?.into_iter().map(|s| s.covector().clone()));
            }
            ConeKind::Psd { hilbert_dim } => {
                let n = *hilbert_dim;
                let root = matrix_sqrt(&coords_to_hermitian(&comp, n))?;
                let mut rng = probe_rng();
                for _ in 0..PSD_REPEATABILITY_PROBES {
                    let p = random_pure_density(n, &mut rng);
                    orthogonal.push(hermitian_to_coords(&(&root * &p * &root)));
                    effects.push(hermitian_to_coords(&p));
                    let rho = crate::sample::random_density(n, &mut rng);
                    states.push(hermitian_to_coords(&rho));
                }
            }
        }
        Ok((orthogonal, effects, states))
    }
}

/// The six equivalent characterizations of `a` being `I`-repeatable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RepeatabilityConditions {
    /// `I*(u) = I*(a) = a`
    pub repeatable: bool,
    /// `a[I]a = a`
    pub idempotent: bool,
    /// `a[I]a′ = θ`
    pub annihilates_complement: bool,
    /// `a[I]b = θ` whenever `a ⊥ b`
    pub annihilates_orthogonal: bool,
    /// `I*(b) ≤ I*(a)` for all effects `b`
    pub dominated: bool,
    /// `I(I(s))(u) = I(s)(u)` for all states, and `I*(u) = a`
    pub stable_probability: bool,
}

impl RepeatabilityConditions {
    pub fn as_array(&self) -> [bool; 6] {
        [
            self.repeatable,
            self.idempotent,
            self.annihilates_complement,
            self.annihilates_orthogonal,
            self.dominated,
            self.stable_probability,
        ]
    }

    /// All six evaluations agree.
    pub fn consistent(&self) -> bool {
        let v = self.as_array();
        v.iter().all(|&b| b == v[0])
    }
}

/// The free-standing sequential product `a[I]b`.
pub fn sequential_product_effects(a: &Effect, op: &Operation, b: &Effect) -> Result<Effect> {
    op.sequential_product(a, b)
}

/// Outcome of deciding whether some operation repeats an effect.
#[derive(Debug, Clone)]
pub struct Repeatability {
    pub repeatable: bool,
    /// `max_s s(a)` over the whole state space.
    pub max_probability: f64,
    /// For a repeatable `a ≠ θ`: a state `s₁` with `s₁(a) = 1` and the
    /// operation `I(s) = s(a)·s₁` that repeats `a`.
    pub witness: Option<(State, Operation)>,
}

/// An effect is repeatable iff it is θ or some state assigns it probability 1.
pub fn is_effect_repeatable(a: &Effect) -> Result<Repeatability> {
    let (max_probability, best) = argmax_state(a)?;
    if a.is_zero() {
        return Ok(Repeatability { repeatable: true, max_probability, witness: None });
    }
    if max_probability >= 1.0 - a.model().tol() {
        let dual = a.vector() * best.covector().transpose();
        let op = Operation::from_parts(a.model(), a.model(), dual);
        return Ok(Repeatability { repeatable: true, max_probability, witness: Some((best, op)) });
    }
    Ok(Repeatability { repeatable: false, max_probability, witness: None })
}
