//! The state-relative commutant [a,b]_alpha = alpha(b)a - alpha(a)b.

use effect_algebra::holevo::{commutant, commutant_laws};
use effect_algebra::{ConeModel, Effect, State};

fn main() -> effect_algebra::Result<()> {
    let m = ConeModel::orthant(2)?;
    let alpha = State::from_slice(&m, &[0.5, 0.5])?;
    let a = Effect::from_slice(&m, &[1.0, 0.3])?;
    let b = Effect::from_slice(&m, &[0.5, 0.5])?;
    println!("[a,b] = {:?}", commutant(&alpha, &a, &b)?.as_slice());
    println!("[a,u] = {:?}", commutant(&alpha, &a, &Effect::unit(&m))?.as_slice());
    println!("[a,a] = {:?}", commutant(&alpha, &a, &a)?.as_slice());
    let laws = commutant_laws(&alpha, &a, &b, &Effect::from_slice(&m, &[0.2, 0.6])?, 1e-12)?;
    println!("{laws:?}");
    Ok(())
}
