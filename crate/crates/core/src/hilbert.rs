//! The Hilbert-space effect algebra `E(H)` for `dim H = n`.
//!
//! Effects are Hermitian `0 ≤ a ≤ I`, states are density operators with the
//! Born rule `s(a) = tr(ρa)`, and operations are built in Kraus form
//! `I(ρ) = Σ KᵢρKᵢ*`, hence completely positive. All arithmetic here is
//! complex; realification happens only when handing vectors to the cone layer.
//! Raw dual matrices passed to [`Operation::new`] on a PSD model bypass the
//! complete-positivity requirement.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cone::{
    coords_to_hermitian, hermitian_eigenvalues, hermitian_to_coords, ConeModel, ConeVector, Effect,
    Model, MAX_HILBERT_DIM,
};
use crate::error::{Error, Result};
use crate::instruments::Instrument;
use crate::observables::Observable;
use crate::operations::Operation;
use crate::states::State;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone)]
pub struct HilbertModel {
    n: usize,
    model: Model,
}

impl HilbertModel {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MAX_HILBERT_DIM).contains(&n) {
            return Err(Error::InvalidModel(format!(
                "Hilbert dimension {n} outside 2..={MAX_HILBERT_DIM}"
            )));
        }
        Ok(HilbertModel { n, model: ConeModel::psd(n)? })
    }

    /// Wraps an existing PSD cone model.
    pub fn from_model(model: &Model) -> Result<Self> {
        match model.hilbert_dim() {
            Some(n) if n >= 2 => Ok(HilbertModel { n, model: model.clone() }),
            _ => Err(Error::InvalidModel("not a PSD model of Hilbert dimension ≥ 2".into())),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn effect(&self, a: &CMatrix) -> Result<Effect> {
        self.check_shape(a)?;
        check_hermitian(a, self.model.tol())?;
        Effect::new(&self.model, hermitian_to_coords(a))
    }

    pub fn matrix(&self, x: &ConeVector) -> CMatrix {
        coords_to_hermitian(x, self.n)
    }

    /// `|k⟩⟨k|` as an effect.
    pub fn basis_projector(&self, k: usize) -> Effect {
        let mut m = CMatrix::zeros(self.n, self.n);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Effect::new(&self.model, hermitian_to_coords(&m)).expect("projectors are effects")
    }

    fn check_shape(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(Error::InvalidMatrix(format!(
                "expected {n}x{n}, found {}x{}",
                m.nrows(),
                m.ncols(),
                n = self.n
            )));
        }
        Ok(())
    }
}

fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidMatrix("matrix is not square".into()));
    }
    let dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > tol {
        return Err(Error::InvalidMatrix(format!("not Hermitian (deviation {dev:e})")));
    }
    Ok(())
}

/// A density operator.
#[derive(Debug, Clone)]
pub struct DensityState {
    rho: CMatrix,
}

impl DensityState {
    pub fn new(rho: CMatrix, tol: f64) -> Result<Self> {
        check_hermitian(&rho, tol)?;
        let trace = rho.trace().re;
        if (trace - 1.0).abs() > tol {
            return Err(Error::NotAState(format!("trace {trace} ≠ 1")));
        }
        let low = hermitian_eigenvalues(&rho)[0];
        if low < -tol {
            return Err(Error::NotAState(format!("negative eigenvalue {low:e}")));
        }
        Ok(DensityState { rho })
    }

    /// `|ψ⟩⟨ψ|` for a nonzero vector, normalized.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::NotAState("zero vector".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        Ok(DensityState { rho: &v * v.adjoint() })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }
}

/// The state `a ↦ tr(ρa)`. Because the coordinate basis is orthonormal for
/// the trace pairing, its covector is just the coordinates of `ρ`.
pub fn born_state(model: &HilbertModel, rho: &CMatrix) -> Result<State> {
    model.check_shape(rho)?;
    let d = DensityState::new(rho.clone(), model.model.tol())?;
    State::new(&model.model, hermitian_to_coords(d.matrix()))
}

/// A finite Kraus family with `Σ Kᵢ*Kᵢ ≤ I`.
#[derive(Debug, Clone)]
pub struct KrausOperation {
    n: usize,
    kraus: Vec<CMatrix>,
}

impl KrausOperation {
    pub fn new(kraus: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidOperation("empty Kraus list".into()))?;
        let n = first.nrows();
        if kraus.iter().any(|k| k.nrows() != n || k.ncols() != n) {
            return Err(Error::InvalidMatrix("Kraus operators must all be n×n".into()));
        }
        let op = KrausOperation { n, kraus };
        let slack = CMatrix::identity(n, n) - op.effect_matrix();
        let low = hermitian_eigenvalues(&slack)[0];
        if low < -tol {
            return Err(Error::InvalidOperation(format!(
                "Σ Kᵢ*Kᵢ exceeds the identity (eigenvalue {low:e})"
            )));
        }
        Ok(op)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `Σ Kᵢ*Kᵢ`, the measured effect.
    pub fn effect_matrix(&self) -> CMatrix {
        self.dual_matrix_action(&CMatrix::identity(self.n, self.n))
    }

    /// `b ↦ Σ Kᵢ* b Kᵢ`.
    pub fn dual_matrix_action(&self, b: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.n, self.n), |acc, k| acc + k.adjoint() * b * k)
    }

    /// `ρ ↦ Σ Kᵢ ρ Kᵢ*`.
    pub fn forward(&self, rho: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.n, self.n), |acc, k| acc + k * rho * k.adjoint())
    }
}

/// The dual matrix of `b ↦ Σ Kᵢ* b Kᵢ`, built column by column on the
/// orthonormal coordinate basis.
pub fn kraus_to_operation(model: &HilbertModel, k: &KrausOperation) -> Result<Operation> {
    if k.n != model.n {
        return Err(Error::DimensionMismatch { expected: model.n, found: k.n });
    }
    let d = model.model.dim();
    let mut dual = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut e = ConeVector::zeros(d);
        e[j] = 1.0;
        let image = hermitian_to_coords(&k.dual_matrix_action(&coords_to_hermitian(&e, model.n)));
        dual.set_column(j, &image);
    }
    Ok(Operation::from_parts(&model.model, &model.model, dual))
}

/// Principal square root of a PSD matrix; eigenvalues in `[−tol, 0)` are
/// clamped to zero.
pub fn matrix_sqrt(a: &CMatrix) -> Result<CMatrix> {
    matrix_sqrt_with_tol(a, 1e-9)
}

pub fn matrix_sqrt_with_tol(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    check_hermitian(a, tol)?;
    let herm = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut roots = Vec::with_capacity(eig.eigenvalues.len());
    for &l in eig.eigenvalues.iter() {
        if l < -tol {
            return Err(Error::InvalidMatrix(format!("negative eigenvalue {l:e}")));
        }
        roots.push(Complex64::new(l.max(0.0).sqrt(), 0.0));
    }
    let v = &eig.eigenvectors;
    Ok(v * CMatrix::from_diagonal(&DVector::from_vec(roots)) * v.adjoint())
}

/// The Lüders instrument `Iₓ(ρ) = Aₓ^{1/2} ρ Aₓ^{1/2}` of a POVM.
pub fn luders_instrument(a: &Observable) -> Result<Instrument> {
    let model = HilbertModel::from_model(a.model())?;
    let ops = a
        .effects()
        .iter()
        .map(|e| {
            let root = matrix_sqrt_with_tol(&model.matrix(e.vector()), model.model.tol())?;
            let k = KrausOperation::new(vec![root], 10.0 * model.model.tol())?;
            kraus_to_operation(&model, &k)
        })
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(a.outcomes().to_vec(), ops)
}
