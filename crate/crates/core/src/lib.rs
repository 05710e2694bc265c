//! Interval effect algebras over finite-dimensional ordered linear spaces.
//!
//! A model is a vector space `V` with a closed pointed cone `K` and an order
//! unit `u`, given either by a polyhedral cone (generators and facets) or by
//! the cone of positive semidefinite `n × n` matrices. On top of it the crate
//! provides effects, states, operations as dual positive maps, observables,
//! instruments, coexistence decided by linear programming with
//! exactly verified certificates, and measure-and-prepare (Holevo)
//! constructions.
//!
//! ```
//! use effect_algebra::{ConeModel, Effect, observables_coexist, Observable};
//!
//! let g = ConeModel::gbit().unwrap();
//! let x = Observable::binary(&Effect::from_slice(&g, &[0.5, 0.5, 0.0]).unwrap());
//! let y = Observable::binary(&Effect::from_slice(&g, &[0.5, 0.0, 0.5]).unwrap());
//! assert!(observables_coexist(&x, &y).unwrap().is_incompatible());
//! ```

pub mod cli;
pub mod cone;
pub mod error;
pub mod feasibility;
pub mod hilbert;
pub mod holevo;
pub mod instruments;
pub mod observables;
pub mod operations;
pub mod sample;
pub mod scenario;
pub mod states;

pub use cone::{ConeKind, ConeModel, ConeVector, Effect, Model, DEFAULT_TOL};
pub use error::{Error, Result};
pub use feasibility::{solve_feasibility, verify_certificate, ConeBlock, FarkasCertificate, Feasibility, LpProblem};
pub use hilbert::{born_state, kraus_to_operation, luders_instrument, matrix_sqrt, DensityState, HilbertModel, KrausOperation};
pub use holevo::{
    commutant, commutant_laws, holevo_compose_identity, holevo_seq_effects, holevo_seq_observables,
    is_pure_representable, mixed_holevo, mixed_holevo_instrument, product_laws, pure_holevo,
    pure_holevo_instrument, Purity,
};
pub use instruments::{
    coexistence_propagates, compose_instruments, condition_observable, instruments_coexist,
    sequential_product_observables, BiInstrument, Instrument,
};
pub use observables::{effects_coexist, observables_coexist, verify_joint, BiObservable, Coexistence, Observable, Verdict};
pub use operations::{is_effect_repeatable, Operation, RepeatabilityConditions};
pub use states::{argmax_state, is_order_determining, mix_states, state_vertices, Functional, State, StateSet, SubState};
