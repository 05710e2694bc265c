//! Seeded random generators for effects, states, observables and operations.
//!
//! Every generator takes the RNG explicitly so test batteries are
//! reproducible from a single seed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::cone::{hermitian_to_coords, ConeKind, ConeVector, Effect, Model};
use crate::hilbert::{kraus_to_operation, CMatrix, HilbertModel, KrausOperation};
use crate::observables::Observable;
use crate::operations::Operation;
use crate::states::{state_vertices, Functional, State};

fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// A Haar-random unitary (QR of a complex Ginibre matrix, phases fixed).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_c(rng));
    let (q, r) = g.qr().unpack();
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    q * CMatrix::from_diagonal(&phases)
}

/// `|ψ⟩⟨ψ|` for a uniformly random unit vector.
pub fn random_pure_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let v = DVector::from_fn(n, |_, _| gaussian_c(rng));
    let v = &v / Complex64::new(v.norm(), 0.0);
    &v * v.adjoint()
}

/// A density matrix `GG*/tr(GG*)` with `G` of random rank.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let rank = rng.random_range(1..=n);
    let g = CMatrix::from_fn(n, rank, |_, _| gaussian_c(rng));
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

/// A random element of the cone.
pub fn random_cone_vector<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> ConeVector {
    match model.kind() {
        ConeKind::Polyhedral { generators, .. } => {
            let mut x = model.zero();
            for g in generators {
                if rng.random_bool(0.7) {
                    let w: f64 = Exp1.sample(rng);
                    x += g * w;
                }
            }
            x
        }
        ConeKind::Psd { hilbert_dim } => {
            let n = *hilbert_dim;
            let rank = rng.random_range(1..=n);
            let g = CMatrix::from_fn(n, rank, |_, _| gaussian_c(rng));
            hermitian_to_coords(&(&g * g.adjoint()))
        }
    }
}

/// A random effect `λx` with `x ∈ K` and `λ` uniform below the largest
/// admissible scale.
pub fn random_effect<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> Effect {
    let x = random_cone_vector(model, rng);
    let top = model.max_scale_below_unit(&x);
    if !top.is_finite() {
        return Effect::zero(model);
    }
    let lambda = top * rng.random_range(0.0..1.0);
    Effect::new(model, x * lambda).expect("scaled cone vectors below the unit are effects")
}

/// A random state: a Dirichlet-like mixture of vertex states, or a random
/// density matrix.
pub fn random_state<R: Rng + ?Sized>(model: &Model, rng: &mut R) -> State {
    match model.kind() {
        ConeKind::Polyhedral { .. } => {
            let vertices = state_vertices(model).expect("polyhedral models have vertex states");
            let weights: Vec<f64> = vertices.iter().map(|_| Exp1.sample(rng)).collect();
            let total: f64 = weights.iter().sum();
            let cov = vertices
                .iter()
                .zip(&weights)
                .fold(model.zero(), |acc, (s, w)| acc + s.covector() * (w / total));
            State::new(model, cov).expect("mixtures of states are states")
        }
        ConeKind::Psd { hilbert_dim } => {
            State::new(model, hermitian_to_coords(&random_density(*hilbert_dim, rng)))
                .expect("density matrices are states")
        }
    }
}

/// A random observable with `k` outcomes: split `u` by successive random
/// effects below the remaining mass, the last outcome taking the rest.
pub fn random_observable<R: Rng + ?Sized>(model: &Model, k: usize, rng: &mut R) -> Observable {
    assert!(k >= 1);
    let mut rest = model.unit().clone();
    let mut effects = Vec::with_capacity(k);
    for _ in 1..k {
        let x = random_cone_vector(model, rng);
        // largest λ with λx ≤ rest
        let top = largest_scale_below(model, &x, &rest);
        let lambda = if top.is_finite() { top * rng.random_range(0.0..1.0) } else { 0.0 };
        let e = &x * lambda;
        rest -= &e;
        effects.push(Effect::new(model, e).expect("scaled below the remaining mass"));
    }
    effects.push(Effect::new(model, rest).expect("the remainder is an effect"));
    Observable::from_effects(model, effects).expect("effects sum to the unit")
}

fn largest_scale_below(model: &Model, x: &ConeVector, y: &ConeVector) -> f64 {
    match model.kind() {
        ConeKind::Polyhedral { facets, .. } => facets
            .iter()
            .filter_map(|f| {
                let fx = f.dot(x);
                (fx > 0.0).then(|| (f.dot(y) / fx).max(0.0))
            })
            .fold(f64::INFINITY, f64::min),
        ConeKind::Psd { hilbert_dim } => {
            // λx ≤ y  ⟺  λ · y^{-1/2} x y^{-1/2} ≤ I on the support of y
            let n = *hilbert_dim;
            let hy = crate::cone::coords_to_hermitian(y, n);
            let eig = hy.symmetric_eigen();
            if eig.eigenvalues.iter().any(|&l| l <= 1e-12) {
                return 0.0;
            }
            let inv_root = &eig.eigenvectors
                * CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)))
                * eig.eigenvectors.adjoint();
            let z = &inv_root * crate::cone::coords_to_hermitian(x, n) * &inv_root;
            let top = z.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
            if top > 0.0 {
                1.0 / top
            } else {
                f64::INFINITY
            }
        }
    }
}

/// How a random operation was built, so tests can recompute its forward
/// action without going through the dual matrix.
#[derive(Debug, Clone)]
pub enum Recipe {
    /// `I(s) = c·(t·s + (1 − t)·Σₓ s(Aₓ)βₓ)`, with `t = 0` unless source and
    /// target coincide.
    MeasurePrepare { effects: Vec<Effect>, states: Vec<State>, mix_identity: f64, scale: f64 },
    Kraus { kraus: Vec<CMatrix> },
}

impl Recipe {
    /// The substate covector `I(s)`, computed directly.
    pub fn forward(&self, s: &State) -> ConeVector {
        match self {
            Recipe::MeasurePrepare { effects, states, mix_identity, scale } => {
                let mp = effects
                    .iter()
                    .zip(states)
                    .fold(ConeVector::zeros(states[0].covector().len()), |acc, (e, b)| {
                        acc + b.covector() * s.pair(e.vector())
                    });
                let mixed = if *mix_identity > 0.0 {
                    s.covector() * *mix_identity + mp * (1.0 - mix_identity)
                } else {
                    mp
                };
                mixed * *scale
            }
            Recipe::Kraus { kraus } => {
                let n = kraus[0].nrows();
                let rho = crate::cone::coords_to_hermitian(s.covector(), n);
                let out = kraus.iter().fold(CMatrix::zeros(n, n), |acc, k| acc + k * &rho * k.adjoint());
                hermitian_to_coords(&out)
            }
        }
    }
}

/// A random operation together with its recipe. `channel` selects trace
/// preservation; otherwise the result is scaled by a factor in `[0.2, 0.9]`.
pub fn random_operation<R: Rng + ?Sized>(source: &Model, target: &Model, channel: bool, rng: &mut R) -> (Operation, Recipe) {
    let scale = if channel { 1.0 } else { rng.random_range(0.2..0.9) };
    if let (Some(n), true) = (source.hilbert_dim(), crate::cone::ConeModel::same(source, target)) {
        if rng.random_bool(0.5) {
            let h = HilbertModel::new(n).expect("PSD source");
            let kraus = random_kraus(n, scale, rng);
            let op = kraus_to_operation(&h, &KrausOperation::new(kraus.clone(), 1e-9).expect("random Kraus family"))
                .expect("matching dimensions");
            return (op, Recipe::Kraus { kraus });
        }
    }
    let k = rng.random_range(1..=3);
    let obs = random_observable(source, k, rng);
    let states: Vec<State> = (0..k).map(|_| random_state(target, rng)).collect();
    let mix_identity = if crate::cone::ConeModel::same(source, target) && rng.random_bool(0.5) {
        rng.random_range(0.0..1.0)
    } else {
        0.0
    };
    let mut dual = DMatrix::zeros(source.dim(), target.dim());
    for (e, b) in obs.effects().iter().zip(&states) {
        dual += e.vector() * b.covector().transpose();
    }
    if mix_identity > 0.0 {
        dual = DMatrix::identity(source.dim(), source.dim()) * mix_identity + dual * (1.0 - mix_identity);
    }
    dual *= scale;
    let op = Operation::new(source, target, dual).expect("measure-and-prepare maps are operations");
    let recipe = Recipe::MeasurePrepare { effects: obs.effects().to_vec(), states, mix_identity, scale };
    (op, recipe)
}

/// A random Kraus family with `Σ Kᵢ*Kᵢ = c·I`: blocks of a random isometry.
pub fn random_kraus<R: Rng + ?Sized>(n: usize, c: f64, rng: &mut R) -> Vec<CMatrix> {
    let r = rng.random_range(1..=3);
    let u = random_unitary(n * r, rng);
    let root = Complex64::new(c.sqrt(), 0.0);
    (0..r)
        .map(|i| u.view((i * n, 0), (n, n)).into_owned() * root)
        .collect()
}
