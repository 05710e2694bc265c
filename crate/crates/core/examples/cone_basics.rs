//! Effects on the gbit square and on a classical trit: order, complements,
//! orthogonal sums.

use effect_algebra::{ConeModel, Effect};

fn main() -> effect_algebra::Result<()> {
    let g = ConeModel::gbit()?;
    let a = Effect::from_slice(&g, &[0.5, 0.25, 0.0])?;
    let b = Effect::from_slice(&g, &[0.25, -0.25, 0.0])?;
    let c = Effect::from_slice(&g, &[0.25, 0.125, 0.0])?;
    println!("a = {:?}, a' = {:?}", a.vector().as_slice(), a.complement().vector().as_slice());
    println!("c <= a: {}, b <= a: {}, a perp b: {}", c.leq(&a)?, b.leq(&a)?, a.perp(&b)?);
    println!("a + b = {:?}", a.add(&b)?.vector().as_slice());

    // fails the facet (1,-1,-1)
    match Effect::from_slice(&g, &[0.9, 0.5, 0.5]) {
        Ok(_) => println!("unexpectedly an effect"),
        Err(e) => println!("rejected: {e}"),
    }

    let trit = ConeModel::orthant(3)?;
    let x = Effect::from_slice(&trit, &[0.2, 1.0, 0.4])?;
    println!("trit effect scaled by 0.5: {:?}", x.scale(0.5)?.vector().as_slice());
    Ok(())
}
