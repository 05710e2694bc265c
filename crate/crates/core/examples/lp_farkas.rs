//! The feasibility engine on its own: a feasible system and an infeasible one
//! with its Farkas certificate.

use effect_algebra::{solve_feasibility, verify_certificate, ConeBlock, Feasibility, LpProblem};

fn main() -> effect_algebra::Result<()> {
    // x, y >= 0, x + y = 1, x - y = 0.5
    let p = LpProblem::new(vec![ConeBlock::orthant(2)], vec![vec![1.0, 1.0], vec![1.0, -1.0]], vec![1.0, 0.5])?;
    if let Feasibility::Feasible(x) = solve_feasibility(&p)? {
        println!("feasible: {x:?}");
    }
    // x, y >= 0, x + y = -1
    let q = LpProblem::new(vec![ConeBlock::orthant(2)], vec![vec![1.0, 1.0]], vec![-1.0])?;
    let r = solve_feasibility(&q)?;
    if let Feasibility::Infeasible(cert) = &r {
        println!("infeasible: y = {:?}, mu = {:?}", cert.equality_multipliers, cert.facet_multipliers);
        println!("certificate verified in exact arithmetic: {}", verify_certificate(&q, &r));
    }
    Ok(())
}
