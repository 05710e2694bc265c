//! Finite instruments, bi-instruments and their coexistence, plus the
//! observable-level sequential product `A[I]B` and conditioning `B|[I]A`.

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::cone::{ConeKind, ConeModel, Effect, Model};
use crate::error::{Error, Result};
use crate::feasibility::{solve_feasibility, ConeBlock, Feasibility, LpProblem};
use crate::observables::{verify_joint, BiObservable, Coexistence, Observable, JOINT_TOL};
use crate::operations::{Operation, MEASURE_TOL_FACTOR};
use crate::states::{Functional, State};

/// A finite family of operations `{Iₓ}` whose sum `Ī` is a channel.
#[derive(Debug, Clone)]
pub struct Instrument {
    outcomes: Vec<String>,
    ops: Vec<Operation>,
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    match labels.iter().find(|l| !seen.insert(l.as_str())) {
        Some(l) => Err(Error::InvalidInstrument(format!("duplicate outcome label `{l}`"))),
        None => Ok(()),
    }
}

fn check_channel_sum(ops: &[Operation]) -> Result<()> {
    let first = &ops[0];
    if ops
        .iter()
        .any(|op| !ConeModel::same(op.source(), first.source()) || !ConeModel::same(op.target(), first.target()))
    {
        return Err(Error::ModelMismatch);
    }
    let total = ops.iter().fold(DMatrix::zeros(first.source().dim(), first.target().dim()), |acc, op| {
        acc + op.dual_matrix()
    });
    let dev = (total * first.target().unit() - first.source().unit()).amax();
    if dev > first.source().tol() {
        return Err(Error::InvalidInstrument(format!(
            "the operations do not sum to a channel (deviation {dev:e})"
        )));
    }
    Ok(())
}

impl Instrument {
    pub fn new(outcomes: Vec<String>, ops: Vec<Operation>) -> Result<Self> {
        if ops.is_empty() || outcomes.len() != ops.len() {
            return Err(Error::InvalidInstrument(format!(
                "{} labels for {} operations",
                outcomes.len(),
                ops.len()
            )));
        }
        check_labels(&outcomes)?;
        check_channel_sum(&ops)?;
        Ok(Instrument { outcomes, ops })
    }

    pub fn from_operations(ops: Vec<Operation>) -> Result<Self> {
        let outcomes = (0..ops.len()).map(|i| format!("x{i}")).collect();
        Self::new(outcomes, ops)
    }

    pub fn source(&self) -> &Model {
        self.ops[0].source()
    }

    pub fn target(&self) -> &Model {
        self.ops[0].target()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn operations(&self) -> &[Operation] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    /// The operation-valued measure `I(Δ) = Σ_{x∈Δ} Iₓ`.
    pub fn ovm<S: AsRef<str>>(&self, subset: &[S]) -> Result<Operation> {
        let mut seen = HashSet::new();
        let mut dual = DMatrix::zeros(self.source().dim(), self.target().dim());
        for label in subset {
            let i = self.index_of(label.as_ref())?;
            if seen.insert(i) {
                dual += self.ops[i].dual_matrix();
            }
        }
        Ok(Operation::from_parts(self.source(), self.target(), dual))
    }

    /// `Ī = Σₓ Iₓ`.
    pub fn total(&self) -> Operation {
        let dual = self
            .ops
            .iter()
            .fold(DMatrix::zeros(self.source().dim(), self.target().dim()), |acc, op| acc + op.dual_matrix());
        Operation::from_parts(self.source(), self.target(), dual)
    }

    /// `Îₓ = Iₓ*(u₂)`.
    pub fn measured_observable(&self) -> Observable {
        let effects = self.ops.iter().map(Operation::measured_effect).collect();
        Observable::new(self.source(), self.outcomes.clone(), effects)
            .expect("the measured effects of an instrument sum to the unit")
    }

    /// `Φₛ(x) = Iₓ(s)(u₂)`, computed through the forward action.
    pub fn distribution(&self, s: &State) -> Result<Vec<f64>> {
        self.ops.iter().map(|op| op.apply(s).map(|out| out.mass())).collect()
    }

    /// Largest entrywise deviation between dual matrices; infinite when the
    /// outcome structure differs.
    pub fn distance(&self, other: &Instrument) -> f64 {
        if self.outcomes != other.outcomes {
            return f64::INFINITY;
        }
        self.ops.iter().zip(&other.ops).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }
}

/// An instrument on a grid `Ω₁ × Ω₂`, row-major with the first outcome
/// outermost.
#[derive(Debug, Clone)]
pub struct BiInstrument {
    rows: Vec<String>,
    cols: Vec<String>,
    cells: Vec<Operation>,
}

impl BiInstrument {
    pub fn new(rows: Vec<String>, cols: Vec<String>, cells: Vec<Operation>) -> Result<Self> {
        check_labels(&rows)?;
        check_labels(&cols)?;
        if rows.is_empty() || cols.is_empty() || cells.len() != rows.len() * cols.len() {
            return Err(Error::InvalidInstrument(format!(
                "grid {}x{} has {} cells",
                rows.len(),
                cols.len(),
                cells.len()
            )));
        }
        check_channel_sum(&cells)?;
        Ok(BiInstrument { rows, cols, cells })
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn cells(&self) -> &[Operation] {
        &self.cells
    }

    pub fn cell(&self, x: usize, y: usize) -> &Operation {
        &self.cells[x * self.cols.len() + y]
    }

    pub fn source(&self) -> &Model {
        self.cells[0].source()
    }

    pub fn target(&self) -> &Model {
        self.cells[0].target()
    }

    fn sum_cells(&self, pick: impl Iterator<Item = usize>) -> Operation {
        let dual = pick.fold(DMatrix::zeros(self.source().dim(), self.target().dim()), |acc, i| {
            acc + self.cells[i].dual_matrix()
        });
        Operation::from_parts(self.source(), self.target(), dual)
    }

    /// `K¹ₓ = Σᵧ Kₓᵧ` and `K²ᵧ = Σₓ Kₓᵧ`.
    pub fn marginals(&self) -> (Instrument, Instrument) {
        let (nr, nc) = (self.rows.len(), self.cols.len());
        let first = (0..nr).map(|x| self.sum_cells((0..nc).map(|y| x * nc + y))).collect();
        let second = (0..nc).map(|y| self.sum_cells((0..nr).map(|x| x * nc + y))).collect();
        (
            Instrument { outcomes: self.rows.clone(), ops: first },
            Instrument { outcomes: self.cols.clone(), ops: second },
        )
    }

    /// `K̂ₓᵧ = Kₓᵧ*(u)`.
    pub fn measured_bi_observable(&self) -> BiObservable {
        let cells = self.cells.iter().map(Operation::measured_effect).collect();
        BiObservable::from_parts(self.source(), self.rows.clone(), self.cols.clone(), cells)
    }

    /// The diagonal bi-instrument `Kₓₓ = Iₓ` of `I` with itself.
    pub fn diagonal(i: &Instrument) -> Self {
        let n = i.len();
        let cells = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    i.ops[k / n].clone()
                } else {
                    Operation::zero(i.source(), i.target())
                }
            })
            .collect();
        BiInstrument { rows: i.outcomes.clone(), cols: i.outcomes.clone(), cells }
    }
}

/// `(I∘J)ₓᵧ = Iₓ` followed by `Jᵧ`, with dual `Iₓ*∘Jᵧ*`.
pub fn compose_instruments(i: &Instrument, j: &Instrument) -> Result<BiInstrument> {
    if !ConeModel::same(i.target(), j.source()) {
        return Err(Error::ModelMismatch);
    }
    let mut cells = Vec::with_capacity(i.len() * j.len());
    for a in &i.ops {
        for b in &j.ops {
            cells.push(a.compose(b)?);
        }
    }
    Ok(BiInstrument { rows: i.outcomes.clone(), cols: j.outcomes.clone(), cells })
}

/// The LP deciding coexistence of two instruments between polyhedral models.
/// Every entry of every dual matrix `Kₓᵧ` is a variable (row-major); a cell is
/// positive iff `f·(Kₓᵧ g) ≥ 0` for every source facet `f` and target
/// generator `g`, and the marginal sums are fixed entrywise.
pub fn joint_instrument_problem(i: &Instrument, j: &Instrument) -> Result<LpProblem> {
    let unsupported = || Error::Unsupported("joint-instrument LP needs polyhedral models".into());
    let facets = i.source().facets().ok_or_else(unsupported)?;
    let gens = i.target().generators().ok_or_else(unsupported)?;
    let (d1, d2) = (i.source().dim(), i.target().dim());
    let cell = d1 * d2;
    let block_facets: Vec<Vec<f64>> = facets
        .iter()
        .flat_map(|f| {
            gens.iter().map(move |g| {
                let mut v = vec![0.0; cell];
                for r in 0..d1 {
                    for c in 0..d2 {
                        v[r * d2 + c] = f[r] * g[c];
                    }
                }
                v
            })
        })
        .collect();
    let (ni, nj) = (i.len(), j.len());
    let blocks = vec![ConeBlock { dim: cell, facets: block_facets }; ni * nj];
    let nvars = ni * nj * cell;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for x in 0..ni {
        let m = i.ops[x].dual_matrix();
        for r in 0..d1 {
            for c in 0..d2 {
                let mut row = vec![0.0; nvars];
                for y in 0..nj {
                    row[(x * nj + y) * cell + r * d2 + c] = 1.0;
                }
                rows.push(row);
                rhs.push(m[(r, c)]);
            }
        }
    }
    for y in 0..nj {
        let m = j.ops[y].dual_matrix();
        for r in 0..d1 {
            for c in 0..d2 {
                let mut row = vec![0.0; nvars];
                for x in 0..ni {
                    row[(x * nj + y) * cell + r * d2 + c] = 1.0;
                }
                rows.push(row);
                rhs.push(m[(r, c)]);
            }
        }
    }
    LpProblem::new(blocks, rows, rhs)
}

/// Whether two instruments `E₁ → E₂` are the marginals of one bi-instrument.
/// Decided by LP between polyhedral models; with a PSD model only the
/// diagonal case is recognized.
pub fn instruments_coexist(i: &Instrument, j: &Instrument) -> Result<Coexistence<BiInstrument>> {
    if !ConeModel::same(i.source(), j.source()) || !ConeModel::same(i.target(), j.target()) {
        return Err(Error::ModelMismatch);
    }
    let tol = i.source().tol();
    if i.len() == j.len() && i.ops.iter().zip(&j.ops).all(|(a, b)| a.distance(b) <= tol) {
        let mut k = BiInstrument::diagonal(i);
        k.cols = j.outcomes.clone();
        return Ok(Coexistence::Compatible(k));
    }
    let polyhedral = |m: &Model| matches!(m.kind(), ConeKind::Polyhedral { .. });
    if !polyhedral(i.source()) || !polyhedral(i.target()) {
        return Ok(Coexistence::Undecided(
            "instrument coexistence on a PSD cone is not decided; verify a supplied joint instead".into(),
        ));
    }
    let p = joint_instrument_problem(i, j)?;
    Ok(match solve_feasibility(&p)? {
        Feasibility::Feasible(x) => {
            let (d1, d2) = (i.source().dim(), i.target().dim());
            let cells = x
                .chunks(d1 * d2)
                .map(|c| Operation::from_parts(i.source(), i.target(), DMatrix::from_row_slice(d1, d2, c)))
                .collect();
            Coexistence::Compatible(BiInstrument { rows: i.outcomes.clone(), cols: j.outcomes.clone(), cells })
        }
        Feasibility::Infeasible(cert) => Coexistence::Incompatible(cert),
    })
}

/// `K` is a joint bi-instrument for `I` and `J`: its marginals match to
/// [`JOINT_TOL`] and every cell is a positive map.
pub fn verify_joint_instrument(i: &Instrument, j: &Instrument, k: &BiInstrument) -> bool {
    if k.rows.len() != i.len() || k.cols.len() != j.len() {
        return false;
    }
    if !ConeModel::same(k.source(), i.source()) || !ConeModel::same(k.target(), i.target()) {
        return false;
    }
    let (k1, k2) = k.marginals();
    let close = |a: &Instrument, b: &Instrument| a.ops.iter().zip(&b.ops).all(|(p, q)| p.distance(q) <= JOINT_TOL);
    close(&k1, i)
        && close(&k2, j)
        && k.cells
            .iter()
            .all(|c| Operation::new(c.source(), c.target(), c.dual_matrix().clone()).is_ok())
}

/// Given a joint bi-instrument `K` of `I` and `J`, checks that `K̂` is a joint
/// bi-observable for `Î` and `Ĵ`. Returns `false` when `K` is not a valid
/// joint of `I` and `J` in the first place.
pub fn coexistence_propagates(i: &Instrument, j: &Instrument, k: &BiInstrument) -> Result<bool> {
    if !ConeModel::same(i.source(), j.source()) || !ConeModel::same(i.target(), j.target()) {
        return Err(Error::ModelMismatch);
    }
    if !verify_joint_instrument(i, j, k) {
        return Ok(false);
    }
    Ok(verify_joint(&i.measured_observable(), &j.measured_observable(), &k.measured_bi_observable()))
}

fn check_measures(a: &Observable, i: &Instrument) -> Result<()> {
    if !ConeModel::same(a.model(), i.source()) {
        return Err(Error::ModelMismatch);
    }
    if a.len() != i.len() {
        return Err(Error::InvalidInstrument(format!(
            "observable has {} outcomes, instrument {}",
            a.len(),
            i.len()
        )));
    }
    let tol = MEASURE_TOL_FACTOR * a.model().tol();
    let dev = a
        .effects()
        .iter()
        .zip(&i.ops)
        .map(|(e, op)| op.measured_effect().distance(e))
        .fold(0.0, f64::max);
    if dev > tol {
        return Err(Error::DoesNotMeasure(dev));
    }
    Ok(())
}

/// `(A[I]B)ₓᵧ = Iₓ*(Bᵧ)` for an instrument measuring `A`.
pub fn sequential_product_observables(a: &Observable, i: &Instrument, b: &Observable) -> Result<BiObservable> {
    check_measures(a, i)?;
    if !ConeModel::same(b.model(), i.target()) {
        return Err(Error::ModelMismatch);
    }
    let mut cells = Vec::with_capacity(a.len() * b.len());
    for op in &i.ops {
        for e in b.effects() {
            cells.push(Effect::from_parts(a.model(), op.dual_apply_vector(e.vector())?));
        }
    }
    BiObservable::new(a.model(), a.outcomes().to_vec(), b.outcomes().to_vec(), cells)
}

/// `(B|[I]A)ᵧ = Σₓ Iₓ*(Bᵧ) = Ī*(Bᵧ)`.
pub fn condition_observable(b: &Observable, a: &Observable, i: &Instrument) -> Result<Observable> {
    Ok(sequential_product_observables(a, i, b)?.marginals().1)
}
