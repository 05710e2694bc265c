//! A measure-and-prepare operation from a classical bit to a trit: forward
//! action on states against the dual action on effects.

use effect_algebra::{ConeModel, Effect, Functional, Operation, State};
use nalgebra::DMatrix;

fn main() -> effect_algebra::Result<()> {
    let bit = ConeModel::orthant(2)?;
    let trit = ConeModel::orthant(3)?;
    // outcome 0 prepares (1,0,0), outcome 1 prepares (0,0.5,0.5)
    let dual = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.5, 0.5]);
    let op = Operation::new(&bit, &trit, dual)?;
    println!("channel: {}", op.is_channel());

    let s = State::from_slice(&bit, &[0.3, 0.7])?;
    let b = Effect::from_slice(&trit, &[0.1, 1.0, 0.2])?;
    let forward = op.apply(&s)?.pair(b.vector());
    let backward = s.evaluate(&op.dual_apply(&b)?)?;
    println!("I(s)(b) = {forward:.6}, s(I*(b)) = {backward:.6}");

    let half = op.scale(0.5)?;
    println!("scaled by 1/2 measures {:?}", half.measured_effect().vector().as_slice());
    Ok(())
}
