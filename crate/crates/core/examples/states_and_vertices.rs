//! Vertex states of polyhedral models and the best state for an effect.

use effect_algebra::{argmax_state, state_vertices, ConeModel, Effect, Functional, HilbertModel};

fn main() -> effect_algebra::Result<()> {
    let g = ConeModel::gbit()?;
    for s in state_vertices(&g)? {
        println!("gbit vertex {:?}", s.covector().as_slice());
    }
    let a = Effect::from_slice(&g, &[0.5, 0.3, 0.1])?;
    let (p, s) = argmax_state(&a)?;
    println!("max_s s(a) = {p:.3} at {:?}", s.covector().as_slice());

    let q = HilbertModel::new(2)?;
    let plus = q.effect(&(q.matrix(q.basis_projector(0).vector()) * num_complex::Complex64::new(0.7, 0.0)))?;
    let (p, _) = argmax_state(&plus)?;
    println!("qubit: largest eigenvalue of 0.7|0><0| is {p:.3}");
    Ok(())
}
