//! Finite-dimensional ordered linear spaces `(V, K)` with an order unit, and
//! the order interval `[θ, u]` of effects.
//!
//! Two cone backends are supported. A *polyhedral* cone carries both its
//! generators (V-representation) and its facet covectors (H-representation):
//! membership is decided on facets, positivity of maps on generators. A *PSD*
//! cone is the cone of positive semidefinite `n × n` Hermitian matrices,
//! realified into `ℝ^{n²}` through an orthonormal basis for the trace inner
//! product, so every other module can treat coordinates uniformly.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

/// A vector of `V`, in the coordinates of its cone model.
pub type ConeVector = DVector<f64>;

/// Default numerical tolerance for every order comparison.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest Hilbert dimension accepted by the PSD backend.
pub const MAX_HILBERT_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum ConeKind {
    Polyhedral {
        generators: Vec<ConeVector>,
        facets: Vec<ConeVector>,
    },
    Psd {
        hilbert_dim: usize,
    },
}

/// An ordered linear space with positive cone `K` and order unit `u`.
///
/// Models are immutable and shared behind an [`Arc`]; every effect, state and
/// operation keeps a handle to the model it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeModel {
    dim: usize,
    kind: ConeKind,
    unit: ConeVector,
    tol: f64,
}

pub type Model = Arc<ConeModel>;

impl ConeModel {
    /// Builds a polyhedral model from both cone representations and validates
    /// every structural invariant (pointed, generating, consistent, unit in the
    /// interior).
    pub fn polyhedral(
        generators: Vec<ConeVector>,
        facets: Vec<ConeVector>,
        unit: ConeVector,
    ) -> Result<Model> {
        Self::polyhedral_with_tol(generators, facets, unit, DEFAULT_TOL)
    }

    pub fn polyhedral_with_tol(
        generators: Vec<ConeVector>,
        facets: Vec<ConeVector>,
        unit: ConeVector,
        tol: f64,
    ) -> Result<Model> {
        let dim = unit.len();
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        check_tol(tol)?;
        if generators.is_empty() || facets.is_empty() {
            return Err(Error::InvalidModel(
                "a polyhedral cone needs at least one generator and one facet".into(),
            ));
        }
        for v in generators.iter().chain(facets.iter()) {
            check_dim(dim, v.len())?;
        }
        let model = ConeModel {
            dim,
            kind: ConeKind::Polyhedral { generators, facets },
            unit,
            tol,
        };
        model.validate_polyhedral()?;
        Ok(Arc::new(model))
    }

    /// The cone of `n × n` positive semidefinite matrices with unit `I`.
    pub fn psd(hilbert_dim: usize) -> Result<Model> {
        Self::psd_with_tol(hilbert_dim, DEFAULT_TOL)
    }

    pub fn psd_with_tol(hilbert_dim: usize, tol: f64) -> Result<Model> {
        check_tol(tol)?;
        if hilbert_dim == 0 || hilbert_dim > MAX_HILBERT_DIM {
            return Err(Error::InvalidModel(format!(
                "Hilbert dimension must lie in 1..={MAX_HILBERT_DIM}, got {hilbert_dim}"
            )));
        }
        let identity = DMatrix::<Complex64>::identity(hilbert_dim, hilbert_dim);
        Ok(Arc::new(ConeModel {
            dim: hilbert_dim * hilbert_dim,
            kind: ConeKind::Psd { hilbert_dim },
            unit: hermitian_to_coords(&identity),
            tol,
        }))
    }

    /// The positive orthant of `ℝ^d` with unit `(1, …, 1)`: classical
    /// probability on `d` outcomes.
    pub fn orthant(d: usize) -> Result<Model> {
        let basis: Vec<ConeVector> = (0..d)
            .map(|i| {
                let mut e = ConeVector::zeros(d);
                e[i] = 1.0;
                e
            })
            .collect();
        Self::polyhedral(basis.clone(), basis, ConeVector::from_element(d, 1.0))
    }

    /// The gbit: effect cone `{a : a₀ ≥ |a₁| + |a₂|}` in `ℝ³`, unit `(1, 0, 0)`,
    /// whose state space is the square with vertices `(1, ±1, ±1)`.
    pub fn gbit() -> Result<Model> {
        let v = |a: f64, b: f64, c: f64| ConeVector::from_vec(vec![a, b, c]);
        let generators = vec![
            v(1.0, 1.0, 0.0),
            v(1.0, -1.0, 0.0),
            v(1.0, 0.0, 1.0),
            v(1.0, 0.0, -1.0),
        ];
        let facets = vec![
            v(1.0, 1.0, 1.0),
            v(1.0, 1.0, -1.0),
            v(1.0, -1.0, 1.0),
            v(1.0, -1.0, -1.0),
        ];
        Self::polyhedral(generators, facets, v(1.0, 0.0, 0.0))
    }

    /// Same cone and unit, different tolerance.
    pub fn with_tol(&self, tol: f64) -> Result<Model> {
        check_tol(tol)?;
        let mut m = self.clone();
        m.tol = tol;
        Ok(Arc::new(m))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn unit(&self) -> &ConeVector {
        &self.unit
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn zero(&self) -> ConeVector {
        ConeVector::zeros(self.dim)
    }

    pub fn is_psd(&self) -> bool {
        matches!(self.kind, ConeKind::Psd { .. })
    }

    pub fn hilbert_dim(&self) -> Option<usize> {
        match self.kind {
            ConeKind::Psd { hilbert_dim } => Some(hilbert_dim),
            ConeKind::Polyhedral { .. } => None,
        }
    }

    pub fn generators(&self) -> Option<&[ConeVector]> {
        match &self.kind {
            ConeKind::Polyhedral { generators, .. } => Some(generators),
            ConeKind::Psd { .. } => None,
        }
    }

    pub fn facets(&self) -> Option<&[ConeVector]> {
        match &self.kind {
            ConeKind::Polyhedral { facets, .. } => Some(facets),
            ConeKind::Psd { .. } => None,
        }
    }

    /// Membership `x ∈ K` up to the model tolerance.
    pub fn contains(&self, x: &ConeVector) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.cone_margin(x) >= -self.tol)
    }

    /// Signed distance-like margin of `x` to the boundary of `K`: the smallest
    /// facet value (polyhedral) or the smallest eigenvalue (PSD). Nonnegative
    /// exactly on `K`.
    pub fn cone_margin(&self, x: &ConeVector) -> f64 {
        match &self.kind {
            ConeKind::Polyhedral { facets, .. } => facets
                .iter()
                .map(|f| f.dot(x))
                .fold(f64::INFINITY, f64::min),
            ConeKind::Psd { hilbert_dim } => {
                let m = coords_to_hermitian(x, *hilbert_dim);
                hermitian_eigenvalues(&m)
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// `x ≤ y` iff `y − x ∈ K`.
    pub fn leq(&self, x: &ConeVector, y: &ConeVector) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        self.contains(&(y - x))
    }

    /// `x ∈ [θ, u]`.
    pub fn in_interval(&self, x: &ConeVector) -> Result<bool> {
        Ok(self.contains(x)? && self.contains(&(&self.unit - x))?)
    }

    /// For `x ∈ K`, the largest `λ ≥ 0` with `λx ≤ u` (infinite for `x = θ`).
    pub fn max_scale_below_unit(&self, x: &ConeVector) -> f64 {
        match &self.kind {
            ConeKind::Polyhedral { facets, .. } => facets
                .iter()
                .filter_map(|f| {
                    let fx = f.dot(x);
                    (fx > 0.0).then(|| (f.dot(&self.unit) / fx).max(0.0))
                })
                .fold(f64::INFINITY, f64::min),
            ConeKind::Psd { hilbert_dim } => {
                let m = coords_to_hermitian(x, *hilbert_dim);
                let top = hermitian_eigenvalues(&m)
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                if top > 0.0 {
                    1.0 / top
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `true` when both handles denote the same model.
    pub fn same(a: &Model, b: &Model) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }

    fn validate_polyhedral(&self) -> Result<()> {
        let ConeKind::Polyhedral { generators, facets } = &self.kind else {
            unreachable!("validate_polyhedral on a PSD model")
        };
        let tol = self.tol;
        let bad = |msg: String| Err(Error::InvalidModel(msg));

        if self.unit.amax() <= tol {
            return bad("the unit must be nonzero".into());
        }
        if self.cone_margin(&self.unit) < -tol {
            return bad("the unit is not in the cone".into());
        }
        for (i, g) in generators.iter().enumerate() {
            if g.amax() <= tol {
                return bad(format!("generator {i} is zero"));
            }
            for (j, f) in facets.iter().enumerate() {
                if f.dot(g) < -tol {
                    return bad(format!("generator {i} violates facet {j}"));
                }
            }
        }
        let gen_rank = rank(generators, self.dim);
        if gen_rank < self.dim {
            return bad(format!(
                "generators span a {gen_rank}-dimensional subspace; the interval must generate V (dim {})",
                self.dim
            ));
        }
        let facet_rank = rank(facets, self.dim);
        if facet_rank < self.dim {
            return bad("the cone contains a line (facets do not span the dual space)".into());
        }
        // Each facet must be tight on dim − 1 independent generators, otherwise
        // the two representations describe different cones.
        for (j, f) in facets.iter().enumerate() {
            let scale = f.amax().max(1.0);
            let tight: Vec<ConeVector> = generators
                .iter()
                .filter(|g| f.dot(g).abs() <= tol * scale * g.amax().max(1.0))
                .cloned()
                .collect();
            if self.dim > 1 && rank(&tight, self.dim) < self.dim - 1 {
                return bad(format!(
                    "facet {j} is not supported by {} independent generators",
                    self.dim - 1
                ));
            }
        }
        // Order unit: u must lie strictly inside every facet that a generator
        // leaves.
        for (i, g) in generators.iter().enumerate() {
            for f in facets {
                if f.dot(g) > tol && f.dot(&self.unit) <= tol {
                    return bad(format!(
                        "the unit is not an order unit: no multiple of generator {i} lies below it"
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConeKind::Polyhedral { generators, facets } => write!(
                f,
                "polyhedral cone in R^{} ({} generators, {} facets)",
                self.dim,
                generators.len(),
                facets.len()
            ),
            ConeKind::Psd { hilbert_dim } => {
                write!(f, "PSD cone of {hilbert_dim}x{hilbert_dim} Hermitian matrices")
            }
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("tolerance must be a nonnegative real, got {tol}")))
    }
}

/// Numerical rank of a family of vectors of length `dim`.
pub(crate) fn rank(vectors: &[ConeVector], dim: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

/// An element of the order interval `[θ, u]`.
#[derive(Debug, Clone)]
pub struct Effect {
    model: Model,
    vector: ConeVector,
}

impl Effect {
    pub fn new(model: &Model, vector: ConeVector) -> Result<Self> {
        check_dim(model.dim(), vector.len())?;
        let lower = model.cone_margin(&vector);
        if lower < -model.tol() {
            return Err(Error::NotAnEffect(format!(
                "vector lies outside the cone (margin {lower:e})"
            )));
        }
        let upper = model.cone_margin(&(model.unit() - &vector));
        if upper < -model.tol() {
            return Err(Error::NotAnEffect(format!(
                "vector exceeds the unit (margin {upper:e})"
            )));
        }
        Ok(Effect { model: model.clone(), vector })
    }

    pub fn from_slice(model: &Model, coords: &[f64]) -> Result<Self> {
        Self::new(model, ConeVector::from_column_slice(coords))
    }

    /// Unchecked; for sums whose membership follows from their construction.
    pub(crate) fn from_parts(model: &Model, vector: ConeVector) -> Self {
        Effect { model: model.clone(), vector }
    }

    /// The null effect θ.
    pub fn zero(model: &Model) -> Self {
        Effect { model: model.clone(), vector: model.zero() }
    }

    /// The unit effect u.
    pub fn unit(model: &Model) -> Self {
        Effect { model: model.clone(), vector: model.unit().clone() }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn vector(&self) -> &ConeVector {
        &self.vector
    }

    pub fn into_vector(self) -> ConeVector {
        self.vector
    }

    pub fn is_zero(&self) -> bool {
        self.vector.amax() <= self.model.tol()
    }

    fn same_model(&self, other: &Effect) -> Result<()> {
        if ConeModel::same(&self.model, &other.model) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    /// `a ⊥ b` iff `a + b ≤ u`.
    pub fn perp(&self, other: &Effect) -> Result<bool> {
        self.same_model(other)?;
        self.model.leq(&(&self.vector + &other.vector), self.model.unit())
    }

    /// The partial sum `a + b`, defined only when `a ⊥ b`.
    pub fn add(&self, other: &Effect) -> Result<Effect> {
        if !self.perp(other)? {
            return Err(Error::NotOrthogonal);
        }
        Effect::new(&self.model, &self.vector + &other.vector)
    }

    /// The attenuated effect `λa` for `λ ∈ [0, 1]`.
    pub fn scale(&self, lambda: f64) -> Result<Effect> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::ScalarOutOfRange(lambda));
        }
        Ok(Effect { model: self.model.clone(), vector: &self.vector * lambda })
    }

    /// The complement `a′ = u − a`.
    pub fn complement(&self) -> Effect {
        Effect {
            model: self.model.clone(),
            vector: self.model.unit() - &self.vector,
        }
    }

    pub fn leq(&self, other: &Effect) -> Result<bool> {
        self.same_model(other)?;
        self.model.leq(&self.vector, &other.vector)
    }

    /// Sup-norm distance between coordinate vectors.
    pub fn distance(&self, other: &Effect) -> f64 {
        (&self.vector - &other.vector).amax()
    }

    pub fn approx_eq(&self, other: &Effect, tol: f64) -> bool {
        ConeModel::same(&self.model, &other.model) && self.distance(other) <= tol
    }
}

impl PartialEq for Effect {
    fn eq(&self, other: &Self) -> bool {
        ConeModel::same(&self.model, &other.model) && self.vector == other.vector
    }
}

// ---------------------------------------------------------------------------
// Realification of Hermitian matrices.
//
// Basis, orthonormal for ⟨A, B⟩ = tr(AB): the n diagonal units E_kk, then for
// each pair j < k (row-major) the symmetric (E_jk + E_kj)/√2 followed by the
// antisymmetric i(E_jk − E_kj)/√2. With this basis tr(AB) is the dot product
// of coordinates.
// ---------------------------------------------------------------------------

/// Coordinates of a Hermitian matrix. Only the upper triangle and the real
/// part of the diagonal are read.
pub fn hermitian_to_coords(m: &DMatrix<Complex64>) -> ConeVector {
    let n = m.nrows();
    let mut x = ConeVector::zeros(n * n);
    for k in 0..n {
        x[k] = m[(k, k)].re;
    }
    let s2 = std::f64::consts::SQRT_2;
    for (idx, (j, k)) in (0..n).tuple_combinations().enumerate() {
        x[n + 2 * idx] = s2 * m[(j, k)].re;
        x[n + 2 * idx + 1] = s2 * m[(j, k)].im;
    }
    x
}

/// Inverse of [`hermitian_to_coords`].
pub fn coords_to_hermitian(x: &ConeVector, n: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = Complex64::new(x[k], 0.0);
    }
    let s2 = std::f64::consts::SQRT_2;
    for (idx, (j, k)) in (0..n).tuple_combinations().enumerate() {
        let z = Complex64::new(x[n + 2 * idx], x[n + 2 * idx + 1]) / s2;
        m[(j, k)] = z;
        m[(k, j)] = z.conj();
    }
    m
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
