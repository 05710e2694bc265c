//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use effect_algebra::cone::{coords_to_hermitian, hermitian_to_coords, ConeModel, ConeVector, Effect, Model};
use effect_algebra::feasibility::{verify_certificate, Feasibility};
use effect_algebra::hilbert::{luders_instrument, CMatrix, HilbertModel};
use effect_algebra::holevo::{
    commutant, commutant_laws, holevo_compose_identity, holevo_seq_effects, holevo_seq_observables,
    is_pure_representable, mixed_holevo_instrument, product_laws, pure_holevo, pure_holevo_instrument, Purity,
};
use effect_algebra::instruments::{
    coexistence_propagates, compose_instruments, instruments_coexist, joint_instrument_problem, Instrument,
};
use effect_algebra::observables::{
    joint_observable_problem, observables_coexist, verify_joint, BiObservable, Coexistence, Observable,
};
use effect_algebra::operations::{is_effect_repeatable, Operation};
use effect_algebra::sample::{random_effect, random_observable, random_operation, random_pure_density, random_state};
use effect_algebra::states::{Functional, State};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gbit() -> Model {
    ConeModel::gbit().unwrap()
}

fn classical(d: usize) -> Model {
    ConeModel::orthant(d).unwrap()
}

fn qubit() -> Model {
    ConeModel::psd(2).unwrap()
}

fn zoo() -> Vec<Model> {
    vec![classical(2), classical(3), classical(4), gbit(), qubit()]
}

fn max_abs(v: &ConeVector) -> f64 {
    v.amax()
}

// ----- independent oracles -----

const GBIT_VERTICES: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [1.0, -1.0, -1.0]];

/// max over the state space of s(x), computed from explicit vertex lists or
/// eigenvalues.
fn max_state_value(model: &Model, x: &ConeVector) -> f64 {
    if let Some(n) = model.hilbert_dim() {
        let h = coords_to_hermitian(x, n);
        return h.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    if model.dim() == 3 && model.unit().as_slice() == [1.0, 0.0, 0.0] {
        return GBIT_VERTICES
            .iter()
            .map(|s| s.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
    }
    // simplex: states are probability vectors
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest facet value or eigenvalue: ≥ 0 iff x ∈ K.
fn cone_slack(model: &Model, x: &ConeVector) -> f64 {
    if let Some(n) = model.hilbert_dim() {
        let h = coords_to_hermitian(x, n);
        return h.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    }
    if model.dim() == 3 && model.unit().as_slice() == [1.0, 0.0, 0.0] {
        return GBIT_VERTICES
            .iter()
            .map(|f| f.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
    }
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Marginal and positivity check of a joint bi-observable, done by hand.
fn joint_deviation(a: &Observable, b: &Observable, c: &BiObservable) -> (f64, f64) {
    let model = a.model();
    let mut marg: f64 = 0.0;
    for (x, ax) in a.effects().iter().enumerate() {
        let mut sum = ConeVector::zeros(model.dim());
        for y in 0..b.len() {
            sum += c.cell(x, y).vector();
        }
        marg = marg.max(max_abs(&(sum - ax.vector())));
    }
    for (y, by) in b.effects().iter().enumerate() {
        let mut sum = ConeVector::zeros(model.dim());
        for x in 0..a.len() {
            sum += c.cell(x, y).vector();
        }
        marg = marg.max(max_abs(&(sum - by.vector())));
    }
    let slack = c.cells().iter().map(|e| cone_slack(model, e.vector())).fold(f64::INFINITY, f64::min);
    (marg, slack)
}

fn effect_from(model: &Model, m: &CMatrix) -> Effect {
    Effect::new(model, hermitian_to_coords(m)).unwrap()
}

fn state_from(model: &Model, m: &CMatrix) -> State {
    State::new(model, hermitian_to_coords(m)).unwrap()
}

/// An effect attaining probability one somewhere, and a state attaining it.
fn sharp_effect<R: Rng>(model: &Model, rng: &mut R) -> (Effect, State) {
    if let Some(n) = model.hilbert_dim() {
        let p = random_pure_density(n, rng);
        let lambda = rng.random_range(0.0..1.0);
        let rest = CMatrix::identity(n, n) - &p;
        return (effect_from(model, &(&p + rest * num_complex::Complex64::new(lambda, 0.0))), state_from(model, &p));
    }
    if model.unit().as_slice() == [1.0, 0.0, 0.0] {
        let t = rng.random_range(0.0..=1.0);
        let a = Effect::from_slice(model, &[0.5, t / 2.0, (1.0 - t) / 2.0]).unwrap();
        return (a, State::from_slice(model, &GBIT_VERTICES[0]).unwrap());
    }
    let d = model.dim();
    let i = rng.random_range(0..d);
    let mut a: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
    a[i] = 1.0;
    let mut s = vec![0.0; d];
    s[i] = 1.0;
    (Effect::from_slice(model, &a).unwrap(), State::from_slice(model, &s).unwrap())
}

// ----- criteria -----

fn ac1_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let models = zoo();
    let mut worst: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let mut disagreements = 0;
    let mut pairs = 0;
    for k in 0..500 {
        let source = &models[k % models.len()];
        let target = if k % 7 == 3 { &models[(k / 7) % 3] } else { source };
        let channel = rng.random_bool(0.5);
        let (op, recipe) = random_operation(source, target, channel, &mut rng);
        for _ in 0..20 {
            let s = random_state(source, &mut rng);
            let b = random_effect(target, &mut rng);
            let via_dual = s.pair(&op.dual_apply_vector(b.vector()).unwrap());
            let forward = op.apply(&s).unwrap().pair(b.vector());
            let direct = recipe.forward(&s).dot(b.vector());
            worst = worst.max((via_dual - forward).abs());
            oracle = oracle.max((via_dual - direct).abs());
            pairs += 1;
        }
        let unit_preserved = max_abs(&(op.dual_apply_vector(target.unit()).unwrap() - source.unit())) <= 1e-9;
        if op.is_channel() != channel || unit_preserved != channel {
            disagreements += 1;
        }
    }
    outcome(
        worst <= 1e-9 && oracle <= 1e-9 && disagreements == 0,
        format!(
            "500 operations, {pairs} pairs: max |s(I*(b)) - I(s)(b)| = {worst:.2e}, vs direct forward map {oracle:.2e}; channel disagreements {disagreements}"
        ),
    )
}

fn ac2_repeatability_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let polys = [classical(2), classical(3), gbit()];
    let q = qubit();
    let h = HilbertModel::new(2).unwrap();
    let mut cases: Vec<(&str, Operation, Effect, bool)> = Vec::new();
    for k in 0..25 {
        let model = if k % 4 == 3 { &q } else { &polys[k % 3] };
        let (a, beta) = sharp_effect(model, &mut rng);
        cases.push(("holevo sharp", pure_holevo(&a, &beta), a.clone(), true));
        let mut other = random_state(model, &mut rng);
        while other.evaluate(&a).unwrap() >= 1.0 - 1e-6 {
            other = random_state(model, &mut rng);
        }
        cases.push(("holevo unsharp", pure_holevo(&a, &other), a, false));
        let beta = random_state(model, &mut rng);
        cases.push(("constant", Operation::constant_channel(model, &beta), Effect::unit(model), true));
    }
    for _ in 0..25 {
        let p = random_pure_density(2, &mut rng);
        let rest = CMatrix::identity(2, 2) - &p;
        let proj = Observable::from_effects(&q, vec![effect_from(&q, &p), effect_from(&q, &rest)]).unwrap();
        let l = luders_instrument(&proj).unwrap();
        cases.push(("luders projective", l.operations()[0].clone(), proj.effects()[0].clone(), true));
        let hi = rng.random_range(0.6..0.95);
        let lo = rng.random_range(0.05..0.4);
        let c = |x: f64| num_complex::Complex64::new(x, 0.0);
        let soft = &p * c(hi) + &rest * c(lo);
        let noisy = Observable::from_effects(&q, vec![h.effect(&soft).unwrap(), h.effect(&(CMatrix::identity(2, 2) - &soft)).unwrap()])
            .unwrap();
        let l = luders_instrument(&noisy).unwrap();
        cases.push(("luders noisy", l.operations()[0].clone(), noisy.effects()[0].clone(), false));
    }
    let mut inconsistent = 0;
    let mut wrong = 0;
    for (_, op, a, expect) in &cases {
        let conds = op.repeatability_conditions(a).unwrap();
        if !conds.consistent() {
            inconsistent += 1;
        }
        if conds.repeatable != *expect {
            wrong += 1;
        }
    }
    outcome(
        cases.len() >= 100 && inconsistent == 0 && wrong == 0,
        format!("{} operations: {inconsistent} with disagreeing conditions, {wrong} with unexpected verdict", cases.len()),
    )
}

fn ac3_repeatability_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let models = [classical(2), classical(3), gbit(), qubit()];
    let mut battery = Vec::new();
    for k in 0..200 {
        let model = &models[k % models.len()];
        let a = match k % 5 {
            0 | 1 => sharp_effect(model, &mut rng).0,
            2 if k % 20 == 2 => Effect::zero(model),
            _ => random_effect(model, &mut rng),
        };
        battery.push(a);
    }
    let mut disagreements = 0;
    let mut bad_witness = 0;
    let mut repeatable = 0;
    for a in &battery {
        let oracle = a.vector().amax() == 0.0 || max_state_value(a.model(), a.vector()) >= 1.0 - 1e-9;
        let r = is_effect_repeatable(a).unwrap();
        if r.repeatable != oracle {
            disagreements += 1;
        }
        if r.repeatable {
            repeatable += 1;
        }
        if let Some((_, op)) = &r.witness {
            if !op.is_repeatable_via(a).unwrap() {
                bad_witness += 1;
            }
        }
    }
    outcome(
        disagreements == 0 && bad_witness == 0,
        format!("{} effects ({repeatable} repeatable): {disagreements} disagreements with the oracle, {bad_witness} failing witnesses", battery.len()),
    )
}

fn ac4_holevo_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let models = zoo();
    let mut dual_dev: f64 = 0.0;
    let mut collapse_dev: f64 = 0.0;
    for k in 0..200 {
        let source = &models[k % models.len()];
        let target = &models[(k / 5) % models.len()];
        let a = random_effect(source, &mut rng);
        let beta = random_state(target, &mut rng);
        let b = random_effect(target, &mut rng);
        let got = pure_holevo(&a, &beta).dual_apply_vector(b.vector()).unwrap();
        let p: f64 = beta.covector().iter().zip(b.vector().iter()).map(|(x, y)| x * y).sum();
        dual_dev = dual_dev.max(max_abs(&(got - a.vector() * p)));

        // Σλᵢ H^(aᵢ,β) = H^(Σλᵢaᵢ, β) and Σλᵢ H^(a,βᵢ) = H^(a, Σλᵢβᵢ)
        let n = rng.random_range(1..=3);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum::<f64>() / rng.random_range(0.5..1.0);
        let lambdas: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let effs: Vec<Effect> = (0..n).map(|_| random_effect(source, &mut rng)).collect();
        let ops: Vec<Operation> = effs.iter().zip(&lambdas).map(|(e, l)| pure_holevo(e, &beta).scale(*l).unwrap()).collect();
        let mixed = Operation::sum(&ops).unwrap();
        let combined = effs.iter().zip(&lambdas).fold(source.zero(), |acc, (e, l)| acc + e.vector() * *l);
        let pure = pure_holevo(&Effect::new(source, combined).unwrap(), &beta);
        collapse_dev = collapse_dev.max((mixed.dual_matrix() - pure.dual_matrix()).amax());

        let weights_total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|x| x / weights_total).collect();
        let states: Vec<State> = (0..n).map(|_| random_state(target, &mut rng)).collect();
        let ops: Vec<Operation> = states.iter().zip(&weights).map(|(s, l)| pure_holevo(&a, s).scale(*l).unwrap()).collect();
        let mixed = Operation::sum(&ops).unwrap();
        let mix = states.iter().zip(&weights).fold(target.zero(), |acc, (s, l)| acc + s.covector() * *l);
        let pure = pure_holevo(&a, &State::new(target, mix).unwrap());
        collapse_dev = collapse_dev.max((mixed.dual_matrix() - pure.dual_matrix()).amax());
    }

    // a mixture that is not pure: β₁(a) = 1, β₂(a′) = 1 on a qubit
    let q = qubit();
    let mut non_pure = 0;
    let mut hypotheses = true;
    for _ in 0..20 {
        let p = random_pure_density(2, &mut rng);
        let a = effect_from(&q, &p);
        let b1 = state_from(&q, &p);
        let b2 = state_from(&q, &(CMatrix::identity(2, 2) - &p));
        hypotheses &= (b1.evaluate(&a).unwrap() - 1.0).abs() < 1e-12 && (b2.evaluate(&a.complement()).unwrap() - 1.0).abs() < 1e-12;
        let lambda = rng.random_range(0.1..0.9);
        let op = Operation::sum(&[pure_holevo(&a, &b1).scale(lambda).unwrap(), pure_holevo(&a.complement(), &b2).scale(1.0 - lambda).unwrap()])
            .unwrap();
        let sv = op.dual_matrix().clone().svd(false, false).singular_values;
        let top = sv.max();
        let rank = sv.iter().filter(|&&s| s > 1e-8 * top).count();
        if rank == 2 && matches!(is_pure_representable(&op).unwrap(), Purity::NotPure { rank: 2, .. }) {
            non_pure += 1;
        }
    }
    outcome(
        dual_dev <= 1e-12 && collapse_dev <= 1e-12 && hypotheses && non_pure == 20,
        format!(
            "dual formula max dev {dual_dev:.2e} (200 triples); collapse identities max dev {collapse_dev:.2e}; qubit mixtures with dual rank 2 and not pure: {non_pure}/20"
        ),
    )
}

fn ac5_mixed_instruments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let models = zoo();
    let mut built = 0;
    let mut measured_dev: f64 = 0.0;
    let mut total_dev: f64 = 0.0;
    let mut invalid_states = 0;
    for t in 0..100 {
        let source = &models[t % models.len()];
        let target = &models[(t / 5) % models.len()];
        let n = rng.random_range(1..=3);
        let k = rng.random_range(1..=4);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        let obs: Vec<Observable> = (0..n).map(|_| random_observable(source, k, &mut rng)).collect();
        let tables: Vec<Vec<State>> = (0..n).map(|_| (0..k).map(|_| random_state(target, &mut rng)).collect()).collect();
        let Ok(inst) = mixed_holevo_instrument(&weights, &obs, &tables) else { continue };
        built += 1;
        let measured = inst.measured_observable();
        for x in 0..k {
            let want = obs.iter().zip(&weights).fold(source.zero(), |acc, (o, w)| acc + o.effects()[x].vector() * *w);
            measured_dev = measured_dev.max(max_abs(&(measured.effects()[x].vector() - want)));
        }
        let total = inst.total();
        for _ in 0..20 {
            let alpha = random_state(source, &mut rng);
            let out = total.apply(&alpha).unwrap();
            let mut want = target.zero();
            for ((o, table), w) in obs.iter().zip(&tables).zip(&weights) {
                for (e, beta) in o.effects().iter().zip(table) {
                    want += beta.covector() * (w * alpha.pair(e.vector()));
                }
            }
            total_dev = total_dev.max(max_abs(&(out.covector() - &want)));
            if State::new(target, out.covector().clone()).is_err() {
                invalid_states += 1;
            }
        }
    }
    outcome(
        built == 100 && measured_dev <= 1e-12 && total_dev <= 1e-12 && invalid_states == 0,
        format!(
            "{built}/100 instruments valid; measured observable max dev {measured_dev:.2e}; total channel vs direct sum {total_dev:.2e}; {invalid_states} invalid output states"
        ),
    )
}

fn ac6_marginals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let models = zoo();
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    let mut compose: f64 = 0.0;
    let mut delta_dev: f64 = 0.0;
    for t in 0..60 {
        let m1 = &models[t % models.len()];
        let m2 = &models[(t / 5) % models.len()];
        let m3 = &models[(t / 2) % models.len()];
        let a = random_observable(m1, rng.random_range(1..=3), &mut rng);
        let alphas: Vec<State> = (0..a.len()).map(|_| random_state(m2, &mut rng)).collect();
        let b = random_observable(m2, rng.random_range(1..=3), &mut rng);
        let betas: Vec<State> = (0..b.len()).map(|_| random_state(m3, &mut rng)).collect();

        let ab = holevo_seq_observables(&a, &alphas, &b).unwrap();
        let (c1, c2) = ab.marginals();
        for (x, y) in c1.effects().iter().zip(a.effects()) {
            first = first.max(max_abs(&(x.vector() - y.vector())));
        }
        for (yi, cy) in c2.effects().iter().enumerate() {
            let want = a
                .effects()
                .iter()
                .zip(&alphas)
                .fold(m1.zero(), |acc, (ax, al)| acc + ax.vector() * al.pair(b.effects()[yi].vector()));
            second = second.max(max_abs(&(cy.vector() - want)));
        }

        let rep = holevo_compose_identity(&a, &alphas, &b, &betas).unwrap();
        compose = compose.max(rep.composed_deviation).max(rep.first_marginal_deviation);
        for (alpha, d) in alphas.iter().zip(&rep.delta) {
            let want = b
                .effects()
                .iter()
                .zip(&betas)
                .fold(m3.zero(), |acc, (by, be)| acc + be.covector() * alpha.pair(by.vector()));
            delta_dev = delta_dev.max(max_abs(&(d.covector() - want)));
        }
        // the elementwise identity, recomputed from the composed instrument
        let composed = compose_instruments(&pure_holevo_instrument(&a, &alphas).unwrap(), &pure_holevo_instrument(&b, &betas).unwrap())
            .unwrap();
        for x in 0..a.len() {
            for y in 0..b.len() {
                let want = ab.cell(x, y).vector() * betas[y].covector().transpose();
                compose = compose.max((composed.cell(x, y).dual_matrix() - want).amax());
            }
        }
    }
    outcome(
        first <= 1e-12 && second <= 1e-12 && compose <= 1e-12 && delta_dev <= 1e-12,
        format!(
            "60 products: first marginal dev {first:.2e}, second marginal dev {second:.2e}, composition vs H^(A o B, beta') {compose:.2e}, delta dev {delta_dev:.2e}"
        ),
    )
}

fn ac7_coexistence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let models = zoo();
    let mut witnesses: Vec<(Observable, Observable, BiObservable)> = Vec::new();

    // (a) self-coexistence through the diagonal
    let mut diag_fail = 0;
    let mut tested = 0;
    for t in 0..40 {
        let m = &models[t % models.len()];
        let a = random_observable(m, rng.random_range(1..=4), &mut rng);
        tested += 1;
        match observables_coexist(&a, &a).unwrap() {
            Coexistence::Compatible(c) => {
                let diag = BiObservable::diagonal(&a);
                let dev = c.cells().iter().zip(diag.cells()).map(|(p, q)| p.distance(q)).fold(0.0, f64::max);
                if dev > 1e-12 {
                    diag_fail += 1;
                }
                witnesses.push((a.clone(), a, c));
            }
            _ => diag_fail += 1,
        }
    }

    // (b) classical pairs always coexist
    let mut classical_fail = 0;
    for t in 0..100 {
        let m = classical(2 + t % 3);
        let a = random_observable(&m, rng.random_range(1..=4), &mut rng);
        let b = random_observable(&m, rng.random_range(1..=4), &mut rng);
        match observables_coexist(&a, &b).unwrap() {
            Coexistence::Compatible(c) => witnesses.push((a, b, c)),
            _ => classical_fail += 1,
        }
    }

    // (c) the gbit's sharp X and Y do not
    let g = gbit();
    let ob = |v: [[f64; 3]; 2]| {
        Observable::from_effects(&g, v.iter().map(|e| Effect::from_slice(&g, e).unwrap()).collect()).unwrap()
    };
    let x = ob([[0.5, 0.5, 0.0], [0.5, -0.5, 0.0]]);
    let y = ob([[0.5, 0.0, 0.5], [0.5, 0.0, -0.5]]);
    let gbit_ok = match observables_coexist(&x, &y).unwrap() {
        Coexistence::Incompatible(cert) => {
            verify_certificate(&joint_observable_problem(&x, &y).unwrap(), &Feasibility::Infeasible(cert))
        }
        _ => false,
    };
    // half-noisy versions are compatible
    let nx = ob([[0.5, 0.25, 0.0], [0.5, -0.25, 0.0]]);
    let ny = ob([[0.5, 0.0, 0.25], [0.5, 0.0, -0.25]]);
    let noisy_ok = match observables_coexist(&nx, &ny).unwrap() {
        Coexistence::Compatible(c) => {
            witnesses.push((nx, ny, c));
            true
        }
        _ => false,
    };

    // (d) every witness re-verifies
    let mut reverify_fail = 0;
    let mut worst_marg: f64 = 0.0;
    let mut worst_slack = f64::INFINITY;
    for (a, b, c) in &witnesses {
        let (marg, slack) = joint_deviation(a, b, c);
        worst_marg = worst_marg.max(marg);
        worst_slack = worst_slack.min(slack);
        if marg > 1e-7 || slack < -1e-9 || !verify_joint(a, b, c) {
            reverify_fail += 1;
        }
    }
    outcome(
        diag_fail == 0 && classical_fail == 0 && gbit_ok && noisy_ok && reverify_fail == 0,
        format!(
            "(a) {tested} self pairs, {diag_fail} failures; (b) 100 classical pairs, {classical_fail} not feasible; (c) gbit X/Y infeasible with exact certificate: {gbit_ok}; (d) {} witnesses, {reverify_fail} failures (max marginal dev {worst_marg:.2e}, min cell slack {worst_slack:.2e})",
            witnesses.len()
        ),
    )
}

fn random_instrument<R: Rng>(source: &Model, target: &Model, rng: &mut R) -> Instrument {
    if source.is_psd() && rng.random_bool(0.5) {
        let a = random_observable(source, rng.random_range(1..=3), rng);
        return luders_instrument(&a).unwrap();
    }
    let a = random_observable(source, rng.random_range(1..=3), rng);
    let betas: Vec<State> = (0..a.len()).map(|_| random_state(target, rng)).collect();
    pure_holevo_instrument(&a, &betas).unwrap()
}

fn ac8_instrument_coexistence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let models = zoo();
    let mut fail = 0;
    for t in 0..50 {
        let m = &models[t % models.len()];
        let first = random_instrument(m, m, &mut rng);
        let second = random_instrument(m, m, &mut rng);
        let k = compose_instruments(&first, &second).unwrap();
        let (i, j) = k.marginals();
        let measured = k.measured_bi_observable();
        let (ihat, jhat) = (i.measured_observable(), j.measured_observable());
        let (marg, slack) = joint_deviation(&ihat, &jhat, &measured);
        let propagates = coexistence_propagates(&i, &j, &k).unwrap();
        if marg > 1e-9 || slack < -1e-9 || !verify_joint(&ihat, &jhat, &measured) || !propagates {
            fail += 1;
        }
    }

    // identity vs swap on a classical bit: both measure the trivial observable
    let m = classical(2);
    let swap = Operation::new(&m, &m, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let i = Instrument::from_operations(vec![Operation::identity(&m)]).unwrap();
    let j = Instrument::from_operations(vec![swap]).unwrap();
    let observables_ok = observables_coexist(&i.measured_observable(), &j.measured_observable()).unwrap().is_compatible();
    let instruments_infeasible = match instruments_coexist(&i, &j).unwrap() {
        Coexistence::Incompatible(cert) => {
            verify_certificate(&joint_instrument_problem(&i, &j).unwrap(), &Feasibility::Infeasible(cert))
        }
        _ => false,
    };
    outcome(
        fail == 0 && observables_ok && instruments_infeasible,
        format!(
            "50 composed bi-instruments, {fail} failures; converse fixture: observables coexist {observables_ok}, instrument LP infeasible with verified certificate {instruments_infeasible}"
        ),
    )
}

fn ac9_commutant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let tol = 1e-10;
    let mut fail = 0;
    let mut triples = 0;
    let mut run = |model: &Model, rng: &mut ChaCha8Rng, count: usize| {
        for t in 0..count {
            let mut a = random_effect(model, rng);
            let mut b = random_effect(model, rng);
            let c = random_effect(model, rng);
            if t % 3 == 0 {
                // makes a ⊥ b so the conditional laws are exercised
                a = a.scale(0.5).unwrap();
                b = b.scale(0.5).unwrap();
            }
            let alpha = random_state(model, rng);
            let beta = random_state(model, rng);
            let p = product_laws(&alpha, &beta, &a, &b, &c, tol).unwrap();
            let q = commutant_laws(&alpha, &a, &b, &c, tol).unwrap();
            triples += 1;
            if !p.all_hold() || !q.all_hold() {
                fail += 1;
            }
        }
    };
    for d in 2..=4 {
        run(&classical(d), &mut rng, if d == 2 { 68 } else { 66 });
    }
    run(&qubit(), &mut rng, 50);

    // fixtures for the stated non-implications
    let m = classical(2);
    let u = Effect::unit(&m);
    let b = Effect::from_slice(&m, &[0.0, 0.5]).unwrap();
    let alpha = State::from_slice(&m, &[1.0, 0.0]).unwrap();
    let product_asymmetric =
        holevo_seq_effects(&u, &alpha, &b).unwrap().is_zero() && !holevo_seq_effects(&b, &alpha, &u).unwrap().is_zero();
    let a = Effect::from_slice(&m, &[1.0, 0.0]).unwrap();
    let mid = State::from_slice(&m, &[0.5, 0.5]).unwrap();
    let with_unit_nonzero = commutant(&mid, &a, &u).unwrap().amax() > tol;
    let theta = Effect::zero(&m);
    let complement_breaks =
        commutant(&mid, &a, &theta).unwrap().amax() <= tol && commutant(&mid, &a, &theta.complement()).unwrap().amax() > tol;
    let fixtures = product_asymmetric && with_unit_nonzero && complement_breaks;
    outcome(
        triples == 250 && fail == 0 && fixtures,
        format!(
            "{triples} triples (200 classical, 50 qubit), {fail} failing; fixtures: a[alpha]b = 0 without b[alpha]a = 0 {product_asymmetric}, [a,u] != 0 {with_unit_nonzero}, [a,0] = 0 with [a,0'] != 0 {complement_breaks}"
        ),
    )
}

fn ac10_cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_effect-algebra");
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let sc = |name: &str| dir.join(name).display().to_string();
    let tmp = std::env::temp_dir().join(format!("effect-algebra-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let witness = tmp.join("witness.json").display().to_string();

    let commands: Vec<(Vec<String>, i32, &str)> = vec![
        (vec!["validate".into(), sc("gbit.json")], 0, "\"PASS\""),
        (vec!["validate".into(), sc("classical.json")], 0, "\"PASS\""),
        (vec!["validate".into(), sc("qubit.json")], 0, "\"PASS\""),
        (vec!["coexist".into(), sc("gbit.json"), "--a".into(), "X".into(), "--b".into(), "Y".into()], 0, "\"INFEASIBLE\""),
        (vec!["coexist".into(), sc("gbit.json"), "--a".into(), "X".into(), "--b".into(), "X".into()], 0, "\"FEASIBLE\""),
        (vec!["coexist".into(), sc("qubit.json"), "--a".into(), "Z".into(), "--b".into(), "X".into()], 0, "\"UNDECIDED\""),
        (
            vec!["coexist".into(), sc("classical.json"), "--a".into(), "A".into(), "--b".into(), "B".into(), "--witness-out".into(), witness.clone()],
            0,
            "\"FEASIBLE\"",
        ),
        (vec!["repeatable".into(), sc("classical.json"), "--effect".into(), "a".into()], 0, "\"state\":[1,0]"),
        (vec!["repeatable".into(), sc("classical.json"), "--effect".into(), "b".into()], 0, "\"NOT_REPEATABLE\""),
        (vec!["repeatable".into(), sc("gbit.json"), "--effect".into(), "zero".into()], 0, "\"REPEATABLE\""),
        (
            vec!["repeatable".into(), sc("qubit.json"), "--effect".into(), "p0".into(), "--op".into(), "prep0".into()],
            0,
            "\"consistent\":true",
        ),
        (
            vec!["seqprod".into(), sc("classical.json"), "--obs".into(), "A".into(), "--instr".into(), "HA".into(), "--then".into(), "B".into()],
            0,
            "[[[0.2,0.06],[0.8,0.24]],[[0,0.35],[0,0.35]]]",
        ),
        (
            vec!["condition".into(), sc("classical.json"), "--obs".into(), "A".into(), "--instr".into(), "HA".into(), "--then".into(), "B".into()],
            0,
            "[[0.2,0.41],[0.8,0.59]]",
        ),
        (
            vec!["commutant".into(), sc("classical.json"), "--state".into(), "mid".into(), "--a".into(), "a".into(), "--b".into(), "b".into()],
            0,
            "[0.175,-0.175]",
        ),
        (vec!["compose".into(), sc("classical.json"), "--i".into(), "HA".into(), "--j".into(), "HB".into()], 0, "\"total_is_channel\":true"),
        (vec!["compose".into(), sc("qubit.json"), "--i".into(), "LZ".into(), "--j".into(), "LX".into()], 0, "\"bi_instrument\""),
        (vec!["coexist".into(), sc("gbit.json"), "--a".into(), "X".into(), "--b".into(), "nope".into()], 2, ""),
        (vec!["compose".into(), sc("classical.json"), "--i".into(), "HA".into(), "--j".into(), "LZ".into()], 2, ""),
    ];

    // invalid and malformed inputs
    let outside = tmp.join("outside.json");
    let mut text = std::fs::read_to_string(dir.join("classical.json")).unwrap();
    text = text.replace("\"coords\": [1, 0.3]", "\"coords\": [1.2, 0.3]");
    std::fs::write(&outside, text).unwrap();
    let malformed = tmp.join("malformed.json");
    std::fs::write(&malformed, "{ \"version\": \"1\", \"models\": ").unwrap();
    let unknown = tmp.join("unknown.json");
    std::fs::write(&unknown, "{ \"version\": \"1\", \"colour\": 3 }").unwrap();
    let mut commands = commands;
    commands.push((vec!["validate".into(), outside.display().to_string()], 1, "\"name\":\"a\""));
    commands.push((vec!["validate".into(), malformed.display().to_string()], 2, ""));
    commands.push((vec!["validate".into(), unknown.display().to_string()], 2, ""));

    let run = |args: &[String]| {
        let out = Command::new(bin).arg("--format").arg("json").args(args).output().expect("binary runs");
        (out.status.code().unwrap_or(-1), out.stdout)
    };
    let mut nondeterministic = Vec::new();
    let mut wrong_code = Vec::new();
    let mut missing = Vec::new();
    let mut witness_bytes = Vec::new();
    for (args, code, needle) in &commands {
        let (c1, o1) = run(args);
        if args.contains(&witness) {
            witness_bytes.push(std::fs::read(&witness).unwrap_or_default());
        }
        let (c2, o2) = run(args);
        if args.contains(&witness) {
            witness_bytes.push(std::fs::read(&witness).unwrap_or_default());
        }
        let label = args[..2.min(args.len())].join(" ");
        if o1 != o2 || c1 != c2 {
            nondeterministic.push(label.clone());
        }
        if c1 != *code {
            wrong_code.push(format!("{label} -> {c1}"));
        }
        if !needle.is_empty() && !String::from_utf8_lossy(&o1).contains(needle) {
            missing.push(format!("{label}: {needle}"));
        }
    }
    let witness_ok = witness_bytes.len() == 2 && !witness_bytes[0].is_empty() && witness_bytes[0] == witness_bytes[1];
    let _ = std::fs::remove_dir_all(&tmp);
    outcome(
        nondeterministic.is_empty() && wrong_code.is_empty() && missing.is_empty() && witness_ok,
        format!(
            "{} commands run twice: nondeterministic {:?}, wrong exit codes {:?}, missing output {:?}, witness file stable {witness_ok}",
            commands.len(),
            nondeterministic,
            wrong_code,
            missing
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("duality", ac1_duality),
        ("repeatability equivalence", ac2_repeatability_equivalence),
        ("repeatability criterion", ac3_repeatability_criterion),
        ("holevo algebra", ac4_holevo_algebra),
        ("mixed holevo instruments", ac5_mixed_instruments),
        ("marginal identities", ac6_marginals),
        ("coexistence", ac7_coexistence),
        ("instrument coexistence", ac8_instrument_coexistence),
        ("commutant suite", ac9_commutant),
        ("cli determinism", ac10_cli),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        if !r.pass {
            failed += 1;
        }
        println!(
            "AC{} {} {}: {} [{:.2}s]",
            n + 1,
            if r.pass { "PASS" } else { "FAIL" },
            name,
            r.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {} failed in {:.2}s", criteria.len() - failed, failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
