//! Conditional evolution of a cavity mode probed by a dissipative two-level
//! atom.
//!
//! The field is read out indirectly: an atom prepared in `g` or `e` interacts
//! with the mode for a time `t` and is then detected in `g` or `e`. Each
//! (prepared, detected) pair defines a transformer, a superoperator taking the
//! initial field state to the unnormalized conditional state. This crate
//! builds the generators of those transformers, solves for them exactly and in
//! two perturbative regimes, integrates the full atom-field system for
//! comparison, and evaluates the information characteristics of the readout.
//!
//! Everything numerical is generic over [`Real`]; the `f64` aliases below are
//! what the CLI and the acceptance suite use.

pub mod error;
pub mod expm;
pub mod fock;
pub mod generator;
pub mod metrics;
pub mod scalar;
pub mod solvers;
pub mod superop;

pub use error::{Error, Result};
pub use fock::{
    annihilation, creation, fock_state, hermitian_eigensystem, mixed_state, number, Dimension,
    Eigensystem, FieldDensityMatrix,
};
pub use generator::{
    conditional_block_generator, derived_constants, presecular_rhs, secular_liouvillian, Atom,
    AtomFieldState, BlockGenerator, DerivedConstants, ModelParams,
};
pub use metrics::{
    conditional_state, detection_probability, information_gain, measure, uhlmann_fidelity,
    von_neumann_entropy, MeasurementRecord,
};
pub use scalar::{exp_divided_difference, max_abs, max_abs_diff, CMatrix, Real};
pub use solvers::{
    characteristic_roots, exact_conditional, integrate_presecular, strong_perturbative,
    weak_first_order, weak_zero_order, CharacteristicRootData, ConditionalPropagators,
    ExactSolver, Method,
};
pub use superop::{
    casimir, choi, commutator, elementary, offset_blocks, scalar_function_of_diagonal,
    Elementary, OffsetBlock, Superoperator,
};

pub type C64 = num_complex::Complex<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type Superop = Superoperator<f64>;
pub type Params = ModelParams<f64>;
pub type Density = FieldDensityMatrix<f64>;
pub type Propagators = ConditionalPropagators<f64>;
pub type Record = MeasurementRecord<f64>;
