//! Sequential products and conditioning of classical observables through a
//! Holevo instrument.

use effect_algebra::instruments::{condition_observable, sequential_product_observables};
use effect_algebra::{pure_holevo_instrument, ConeModel, Effect, Observable, State};

fn main() -> effect_algebra::Result<()> {
    let m = ConeModel::orthant(2)?;
    let e = |x: [f64; 2]| Effect::from_slice(&m, &x);
    let a = Observable::from_effects(&m, vec![e([1.0, 0.3])?, e([0.0, 0.7])?])?;
    let b = Observable::from_effects(&m, vec![e([0.2, 0.6])?, e([0.8, 0.4])?])?;
    let betas = vec![State::from_slice(&m, &[1.0, 0.0])?, State::from_slice(&m, &[0.25, 0.75])?];
    let i = pure_holevo_instrument(&a, &betas)?;

    let grid = sequential_product_observables(&a, &i, &b)?;
    for x in 0..a.len() {
        for y in 0..b.len() {
            println!("(A[I]B)[{x},{y}] = {:?}", grid.cell(x, y).vector().as_slice());
        }
    }
    let cond = condition_observable(&b, &a, &i)?;
    for (y, c) in cond.effects().iter().enumerate() {
        println!("(B|[I]A)[{y}] = {:?}", c.vector().as_slice());
    }
    Ok(())
}
