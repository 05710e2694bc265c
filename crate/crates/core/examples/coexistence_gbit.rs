//! The gbit's sharp X and Y measurements cannot be measured jointly; their
//! half-noisy versions can.

use effect_algebra::observables::joint_observable_problem;
use effect_algebra::{observables_coexist, verify_certificate, Coexistence, ConeModel, Effect, Feasibility, Observable};

fn observable(g: &effect_algebra::Model, e: [[f64; 3]; 2]) -> effect_algebra::Result<Observable> {
    Observable::from_effects(g, e.iter().map(|x| Effect::from_slice(g, x)).collect::<Result<_, _>>()?)
}

fn main() -> effect_algebra::Result<()> {
    let g = ConeModel::gbit()?;
    for eta in [1.0, 0.5] {
        let h = 0.5 * eta;
        let x = observable(&g, [[0.5, h, 0.0], [0.5, -h, 0.0]])?;
        let y = observable(&g, [[0.5, 0.0, h], [0.5, 0.0, -h]])?;
        match observables_coexist(&x, &y)? {
            Coexistence::Compatible(c) => {
                println!("eta = {eta}: joint observable found");
                for (k, cell) in c.cells().iter().enumerate() {
                    println!("  C[{k}] = {:?}", cell.vector().as_slice());
                }
            }
            Coexistence::Incompatible(cert) => {
                let ok = verify_certificate(&joint_observable_problem(&x, &y)?, &Feasibility::Infeasible(cert.clone()));
                println!("eta = {eta}: incompatible, certificate checks exactly: {ok}");
            }
            Coexistence::Undecided(why) => println!("eta = {eta}: undecided ({why})"),
        }
    }
    Ok(())
}
