//! Mixed Holevo instruments and the composition identity for pure ones.

use effect_algebra::holevo::{holevo_compose_identity, mixed_holevo_instrument};
use effect_algebra::sample::{random_observable, random_state};
use effect_algebra::{ConeModel, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> effect_algebra::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = ConeModel::gbit()?;
    let a1 = random_observable(&m, 2, &mut rng);
    let a2 = random_observable(&m, 2, &mut rng);
    let table = |rng: &mut ChaCha8Rng| (0..2).map(|_| random_state(&m, rng)).collect::<Vec<State>>();
    let (t1, t2) = (table(&mut rng), table(&mut rng));
    let inst = mixed_holevo_instrument(&[0.3, 0.7], &[a1.clone(), a2.clone()], &[t1.clone(), t2.clone()])?;
    for (x, e) in inst.measured_observable().effects().iter().enumerate() {
        let want = a1.effects()[x].vector() * 0.3 + a2.effects()[x].vector() * 0.7;
        println!("measured[{x}] = {:?}  (0.3 A1 + 0.7 A2 = {:?})", e.vector().as_slice(), want.as_slice());
    }

    let b = random_observable(&m, 3, &mut rng);
    let betas: Vec<State> = (0..3).map(|_| random_state(&m, &mut rng)).collect();
    let rep = holevo_compose_identity(&a1, &t1, &b, &betas)?;
    println!("H^(A,alpha) o H^(B,beta) vs closed forms: max deviation {:.1e}", rep.max_deviation());
    Ok(())
}
