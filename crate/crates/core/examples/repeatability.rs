//! Which effects can be repeated, and the six equivalent conditions for a
//! given operation.

use effect_algebra::holevo::pure_holevo;
use effect_algebra::{is_effect_repeatable, ConeModel, Effect, State};

fn main() -> effect_algebra::Result<()> {
    let m = ConeModel::orthant(2)?;
    for coords in [[1.0, 0.3], [0.5, 0.5], [0.0, 0.0]] {
        let a = Effect::from_slice(&m, &coords)?;
        let r = is_effect_repeatable(&a)?;
        println!("{coords:?}: repeatable {} (max probability {:.2})", r.repeatable, r.max_probability);
    }

    let a = Effect::from_slice(&m, &[1.0, 0.3])?;
    for beta in [[1.0, 0.0], [0.5, 0.5]] {
        let op = pure_holevo(&a, &State::from_slice(&m, &beta)?);
        let c = op.repeatability_conditions(&a)?;
        println!("H^(a, {beta:?}): {:?} consistent {}", c.as_array(), c.consistent());
    }
    Ok(())
}
