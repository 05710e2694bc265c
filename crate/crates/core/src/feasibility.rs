//! Dense phase-1 simplex for conic linear feasibility problems
//!
//! ```text
//!     A x = b,    x_k ∈ K_k = { z : f · z ≥ 0 for every facet f of block k }
//! ```
//!
//! The solver either returns a feasible point or a Farkas certificate `(y, μ)`
//! with `μ ≥ 0`, `(Aᵀy)_k = F_kᵀ μ_k` on every block, and `bᵀy < 0`; any
//! feasible `x` would give `0 > bᵀy = Σ μ_kᵀ F_k x_k ≥ 0`.
//!
//! Certificates are re-checked in exact rational arithmetic by
//! [`verify_certificate`], after every input is rationalized to its best
//! approximation with denominator at most 10⁶.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot tolerance of the simplex.
pub const PIVOT_TOL: f64 = 1e-10;
/// Residual tolerance for feasible points.
pub const FEASIBLE_TOL: f64 = 1e-7;
/// A Farkas certificate must satisfy `bᵀy` below minus this value.
pub const FARKAS_MARGIN: f64 = 1e-9;
/// Largest denominator used when rationalizing floating-point data.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

const MAX_PIVOTS: usize = 200_000;

/// A block of consecutive variables constrained to a polyhedral cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub dim: usize,
    pub facets: Vec<Vec<f64>>,
}

impl ConeBlock {
    /// The nonnegative orthant of `ℝ^dim`.
    pub fn orthant(dim: usize) -> Self {
        let facets = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        ConeBlock { dim, facets }
    }

    /// Unconstrained variables.
    pub fn free(dim: usize) -> Self {
        ConeBlock { dim, facets: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub blocks: Vec<ConeBlock>,
    /// Row-major equality matrix, one row per constraint.
    pub eq_matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    /// `y`, one multiplier per equality row.
    pub equality_multipliers: Vec<f64>,
    /// `μ_k ≥ 0`, one vector per block, one entry per facet.
    pub facet_multipliers: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible(FarkasCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

impl LpProblem {
    pub fn new(blocks: Vec<ConeBlock>, eq_matrix: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let p = LpProblem { blocks, eq_matrix, rhs };
        p.check()?;
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.eq_matrix.len() != self.rhs.len() {
            return Err(Error::MalformedProblem(format!(
                "{} equality rows but {} right-hand sides",
                self.eq_matrix.len(),
                self.rhs.len()
            )));
        }
        if let Some(i) = self.eq_matrix.iter().position(|r| r.len() != n) {
            return Err(Error::MalformedProblem(format!(
                "equality row {i} has {} entries, expected {n}",
                self.eq_matrix[i].len()
            )));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if let Some(f) = b.facets.iter().find(|f| f.len() != b.dim) {
                return Err(Error::MalformedProblem(format!(
                    "block {k} has a facet of length {}, expected {}",
                    f.len(),
                    b.dim
                )));
            }
        }
        let finite = self.eq_matrix.iter().flatten().chain(&self.rhs).all(|v| v.is_finite())
            && self.blocks.iter().flat_map(|b| b.facets.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::MalformedProblem("non-finite coefficient".into()));
        }
        Ok(())
    }

    fn block_offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                let start = *acc;
                *acc += b.dim;
                Some(start)
            })
            .collect()
    }

    /// Largest violation of the constraints at `x` (floating point).
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, &b) in self.eq_matrix.iter().zip(&self.rhs) {
            let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            worst = worst.max((ax - b).abs());
        }
        for (block, start) in self.blocks.iter().zip(self.block_offsets()) {
            let xs = &x[start..start + block.dim];
            for f in &block.facets {
                let fx: f64 = f.iter().zip(xs).map(|(a, v)| a * v).sum();
                worst = worst.max(-fx);
            }
        }
        worst
    }
}

/// Dense tableau in standard form `Ã w = b̃, w ≥ 0` with one artificial per row.
struct Tableau {
    rows: usize,
    cols: usize, // structural columns, artificials follow
    data: Vec<f64>, // rows × (cols + rows + 1), last column is the rhs
    cost: Vec<f64>, // reduced costs, last entry is −(phase-1 objective)
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + self.rows + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width();
        let pv = self.at(p, q);
        for j in 0..w {
            self.data[p * w + j] /= pv;
        }
        let prow: Vec<f64> = self.data[p * w..(p + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == p {
                continue;
            }
            let factor = self.data[i * w + q];
            if factor != 0.0 {
                for j in 0..w {
                    self.data[i * w + j] -= factor * prow[j];
                }
                self.data[i * w + q] = 0.0;
            }
        }
        let factor = self.cost[q];
        if factor != 0.0 {
            for j in 0..w {
                self.cost[j] -= factor * prow[j];
            }
            self.cost[q] = 0.0;
        }
        self.basis[p] = q;
    }

    /// Bland's rule: lowest-index improving column, lowest-index basic variable
    /// among ratio ties.
    fn run(&mut self) -> Result<()> {
        let total = self.cols + self.rows;
        for _ in 0..MAX_PIVOTS {
            let Some(q) = (0..total).find(|&j| self.cost[j] < -PIVOT_TOL) else {
                return Ok(());
            };
            let rhs = self.width() - 1;
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.rows {
                let a = self.at(i, q);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, rhs) / a;
                    let better = match best {
                        None => true,
                        Some((r, _, var)) => {
                            ratio < r - PIVOT_TOL
                                || ((ratio - r).abs() <= PIVOT_TOL && self.basis[i] < var)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, p, _)) => self.pivot(p, q),
                // Phase 1 is bounded below by zero; an unbounded ray only
                // arises from round-off, so the current basis is final.
                None => return Ok(()),
            }
        }
        Err(Error::MalformedProblem(format!(
            "simplex exceeded {MAX_PIVOTS} pivots"
        )))
    }
}

/// Decides feasibility of `p`. Deterministic: identical problems give
/// bit-identical results.
pub fn solve_feasibility(p: &LpProblem) -> Result<Feasibility> {
    p.check()?;
    let n = p.num_vars();
    let offsets = p.block_offsets();
    let eq_rows = p.rhs.len();
    let facet_rows: usize = p.blocks.iter().map(|b| b.facets.len()).sum();
    let rows = eq_rows + facet_rows;
    // columns: x⁺ (n), x⁻ (n), one slack per facet row
    let cols = 2 * n + facet_rows;

    let mut t = Tableau {
        rows,
        cols,
        data: vec![0.0; rows * (cols + rows + 1)],
        cost: vec![0.0; cols + rows + 1],
        basis: (cols..cols + rows).collect(),
    };
    let w = t.width();
    let mut sign = vec![1.0; rows];

    for (i, (row, &b)) in p.eq_matrix.iter().zip(&p.rhs).enumerate() {
        let s = if b < 0.0 { -1.0 } else { 1.0 };
        sign[i] = s;
        for (j, &a) in row.iter().enumerate() {
            t.data[i * w + j] = s * a;
            t.data[i * w + n + j] = -s * a;
        }
        t.data[i * w + w - 1] = s * b;
    }
    let mut r = eq_rows;
    for (block, &start) in p.blocks.iter().zip(&offsets) {
        for f in &block.facets {
            for (j, &a) in f.iter().enumerate() {
                t.data[r * w + start + j] = a;
                t.data[r * w + n + start + j] = -a;
            }
            t.data[r * w + 2 * n + (r - eq_rows)] = -1.0;
            r += 1;
        }
    }
    for i in 0..rows {
        t.data[i * w + cols + i] = 1.0;
        for j in 0..cols {
            t.cost[j] -= t.data[i * w + j];
        }
        t.cost[w - 1] -= t.data[i * w + w - 1];
    }

    t.run()?;

    let objective = -t.cost[w - 1];
    let scale = p.rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if objective <= FARKAS_MARGIN * scale {
        let mut wv = vec![0.0; cols + rows];
        for (i, &var) in t.basis.iter().enumerate() {
            wv[var] = t.at(i, w - 1);
        }
        let x: Vec<f64> = (0..n).map(|j| wv[j] - wv[n + j]).collect();
        if p.residual(&x) <= FEASIBLE_TOL {
            return Ok(Feasibility::Feasible(x));
        }
    }

    // Phase-1 duals: reduced cost of artificial i is 1 − y_i. The Farkas
    // multipliers are −y mapped back through the row sign flips.
    let z: Vec<f64> = (0..rows).map(|i| -(1.0 - t.cost[cols + i]) * sign[i]).collect();
    let equality_multipliers = z[..eq_rows].to_vec();
    let mut facet_multipliers = Vec::with_capacity(p.blocks.len());
    let mut r = eq_rows;
    for block in &p.blocks {
        facet_multipliers.push(
            (0..block.facets.len())
                .map(|k| {
                    let mu = -z[r + k];
                    if mu.abs() < PIVOT_TOL { 0.0 } else { mu }
                })
                .collect(),
        );
        r += block.facets.len();
    }
    Ok(Feasibility::Infeasible(FarkasCertificate {
        equality_multipliers,
        facet_multipliers,
    }))
}

/// Best rational approximation of `x` with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: i64) -> BigRational {
    assert!(x.is_finite(), "cannot rationalize {x}");
    let negative = x < 0.0;
    let mut rest = x.abs();
    // convergents h/k of the continued fraction
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let max = BigInt::from(max_den);
    for _ in 0..64 {
        let a = rest.floor();
        let ai = BigInt::from(a as i128);
        let k2 = &ai * &k1 + &k0;
        if k2 > max {
            // best semiconvergent that still fits
            let t = (&max - &k0) / &k1;
            let hs = &t * &h1 + &h0;
            let ks = &t * &k1 + &k0;
            let cand = BigRational::new(hs, ks);
            let conv = BigRational::new(h1.clone(), k1.clone());
            let target = BigRational::from_float(x.abs()).unwrap_or_else(BigRational::zero);
            let pick = if (&cand - &target).abs() < (&conv - &target).abs() { cand } else { conv };
            return if negative { -pick } else { pick };
        }
        let h2 = &ai * &h1 + &h0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = rest - a;
        if frac < 1e-15 * rest.max(1.0) {
            break;
        }
        rest = 1.0 / frac;
    }
    let r = BigRational::new(h1, k1);
    if negative {
        -r
    } else {
        r
    }
}

fn q(x: f64) -> BigRational {
    rationalize(x, MAX_DENOMINATOR)
}

/// Re-checks a solver result in exact rational arithmetic.
///
/// Feasible points must satisfy every constraint to [`FEASIBLE_TOL`];
/// Farkas certificates must hold exactly.
pub fn verify_certificate(p: &LpProblem, result: &Feasibility) -> bool {
    if p.check().is_err() {
        return false;
    }
    let a: Vec<Vec<BigRational>> = p.eq_matrix.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
    let b: Vec<BigRational> = p.rhs.iter().map(|&v| q(v)).collect();
    let offsets = p.block_offsets();
    match result {
        Feasibility::Feasible(x) => {
            if x.len() != p.num_vars() || x.iter().any(|v| !v.is_finite()) {
                return false;
            }
            let tol = q(FEASIBLE_TOL);
            let xq: Vec<BigRational> = x.iter().map(|&v| q(v)).collect();
            for (row, bi) in a.iter().zip(&b) {
                let ax = row.iter().zip(&xq).fold(BigRational::zero(), |s, (u, v)| s + u * v);
                if (ax - bi).abs() > tol {
                    return false;
                }
            }
            for (block, start) in p.blocks.iter().zip(offsets) {
                for f in &block.facets {
                    let fx = f
                        .iter()
                        .zip(&xq[start..start + block.dim])
                        .fold(BigRational::zero(), |s, (&u, v)| s + q(u) * v);
                    if fx < -tol.clone() {
                        return false;
                    }
                }
            }
            true
        }
        Feasibility::Infeasible(cert) => {
            if cert.equality_multipliers.len() != b.len()
                || cert.facet_multipliers.len() != p.blocks.len()
            {
                return false;
            }
            let y: Vec<BigRational> = cert.equality_multipliers.iter().map(|&v| q(v)).collect();
            let by = b.iter().zip(&y).fold(BigRational::zero(), |s, (u, v)| s + u * v);
            if !by.is_negative() {
                return false;
            }
            for ((block, start), mu) in p.blocks.iter().zip(offsets).zip(&cert.facet_multipliers) {
                if mu.len() != block.facets.len() {
                    return false;
                }
                let mu: Vec<BigRational> = mu.iter().map(|&v| q(v)).collect();
                if mu.iter().any(|m| m.is_negative()) {
                    return false;
                }
                for j in 0..block.dim {
                    let aty = a.iter().zip(&y).fold(BigRational::zero(), |s, (row, yi)| s + &row[start + j] * yi);
                    let ftmu = block
                        .facets
                        .iter()
                        .zip(&mu)
                        .fold(BigRational::zero(), |s, (f, m)| s + q(f[j]) * m);
                    if aty != ftmu {
                        return false;
                    }
                }
            }
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(rhs: f64) -> LpProblem {
        LpProblem::new(vec![ConeBlock::orthant(1)], vec![vec![1.0]], vec![rhs]).unwrap()
    }

    #[test]
    fn nonnegative_scalar_equal_to_one() {
        let p = scalar(1.0);
        let r = solve_feasibility(&p).unwrap();
        assert_eq!(r, Feasibility::Feasible(vec![1.0]));
        assert!(verify_certificate(&p, &r));
    }

    #[test]
    fn nonnegative_scalar_equal_to_minus_one() {
        let p = scalar(-1.0);
        let r = solve_feasibility(&p).unwrap();
        let Feasibility::Infeasible(cert) = &r else { panic!("expected infeasible") };
        let by: f64 = cert.equality_multipliers[0] * -1.0;
        assert!(by < -FARKAS_MARGIN);
        assert!(verify_certificate(&p, &r));
    }

    #[test]
    fn corrupted_results_fail_verification() {
        let p = scalar(1.0);
        assert!(!verify_certificate(&p, &Feasibility::Feasible(vec![0.5])));
        assert!(!verify_certificate(&p, &Feasibility::Feasible(vec![-1.0, 2.0])));
        let q = scalar(-1.0);
        let Feasibility::Infeasible(mut cert) = solve_feasibility(&q).unwrap() else { unreachable!() };
        cert.equality_multipliers[0] = -cert.equality_multipliers[0];
        assert!(!verify_certificate(&q, &Feasibility::Infeasible(cert)));
    }

    #[test]
    fn free_block_and_redundant_rows() {
        // x free, y ≥ 0: x + y = 1, x − y = 3, 2x = 4 (redundant) → x = 2, y = −1 infeasible
        let p = LpProblem::new(
            vec![ConeBlock::free(1), ConeBlock::orthant(1)],
            vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![2.0, 0.0]],
            vec![1.0, 3.0, 4.0],
        )
        .unwrap();
        let r = solve_feasibility(&p).unwrap();
        assert!(!r.is_feasible());
        assert!(verify_certificate(&p, &r));

        // x + y = 3, x − y = 1, 2x = 4 → x = 2, y = 1
        let p = LpProblem::new(p.blocks.clone(), p.eq_matrix.clone(), vec![3.0, 1.0, 4.0]).unwrap();
        let r = solve_feasibility(&p).unwrap();
        let Feasibility::Feasible(x) = &r else { panic!("expected feasible") };
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(verify_certificate(&p, &r));
    }

    #[test]
    fn malformed_problems_are_rejected() {
        assert!(LpProblem::new(vec![ConeBlock::orthant(2)], vec![vec![1.0]], vec![1.0]).is_err());
        assert!(LpProblem::new(vec![ConeBlock::orthant(1)], vec![vec![1.0]], vec![]).is_err());
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1_000_000), BigRational::new(1.into(), 2.into()));
        assert_eq!(rationalize(-1.0 / 3.0, 1_000_000), BigRational::new((-1).into(), 3.into()));
        assert_eq!(rationalize(0.1 + 0.2, 1_000_000), BigRational::new(3.into(), 10.into()));
        assert_eq!(rationalize(1e-17, 1_000_000), BigRational::zero());
        let pi = rationalize(std::f64::consts::PI, 1000);
        assert_eq!(pi, BigRational::new(355.into(), 113.into()));
    }

    #[test]
    fn solving_is_deterministic() {
        let p = LpProblem::new(
            vec![ConeBlock::orthant(3)],
            vec![vec![1.0, 1.0, 1.0], vec![0.3, 0.5, 0.9]],
            vec![1.0, 0.6],
        )
        .unwrap();
        let a = solve_feasibility(&p).unwrap();
        let b = solve_feasibility(&p).unwrap();
        assert_eq!(a, b);
    }
}
