//! Qubit Lüders instruments: state update, repeatability of projective
//! outcomes, and a Kraus channel as a general operation.

use effect_algebra::hilbert::CMatrix;
use effect_algebra::{born_state, kraus_to_operation, luders_instrument, HilbertModel, KrausOperation, Observable};
use num_complex::Complex64;

fn main() -> effect_algebra::Result<()> {
    let h = HilbertModel::new(2)?;
    let c = |re: f64| Complex64::new(re, 0.0);
    let plus = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.5)]);
    let minus = CMatrix::identity(2, 2) - &plus;
    let x = Observable::from_effects(h.model(), vec![h.effect(&plus)?, h.effect(&minus)?])?;
    let lx = luders_instrument(&x)?;

    let zero = born_state(&h, &CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]))?;
    println!("P(+ | |0>) = {:?}", lx.distribution(&zero)?);
    let after = lx.operations()[0].update_state(&zero)?;
    let rho = h.matrix(effect_algebra::Functional::covector(&after));
    println!("state after +: {:?}", rho.iter().map(|z| (z.re * 1e3).round() / 1e3).collect::<Vec<_>>());
    let conds = lx.operations()[0].repeatability_conditions(&x.effects()[0])?;
    println!("+ is repeated by its Lüders operation: {:?}", conds.as_array());

    let bit_flip = KrausOperation::new(vec![CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])], 1e-9)?;
    let op = kraus_to_operation(&h, &bit_flip)?;
    println!("bit flip is a channel: {}", op.is_channel());
    Ok(())
}
