//! Simulation and gradient-based design of ancilla-assisted tunneling for
//! bosons in a double-well trap.
//!
//! The two-mode Bose–Hubbard model is written with Schwinger spin operators:
//! a system of `N_S` bosons is coupled to an ancilla of `N_A` bosons, and the
//! ancilla state, its Hamiltonian and the coupling are learned so that the
//! system tunnels from the left to the right well.
//!
//! - [`algebra`]: spin operators and Hamiltonians.
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, partial traces.
//! - [`dynamics`]: unitary and dephasing (GKSL) evolution.
//! - [`oracle`]: closed-form probabilities for solvable cases.
//! - [`model`]: scenario description and derived operators.
//! - [`optimize`]: losses, exact gradients and Adam.
//! - [`experiments`]: TOML scenarios, sweeps and CSV/JSON export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod dynamics;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod oracle;

pub use algebra::{Axis, ConventionFlags, HamiltonianParams, OperatorSet, SpinScale, UnitSystem};
pub use dynamics::{DensityMatrix, NoiseParams, Trajectory};
pub use linalg::CMatrix;
pub use model::{AncillaInit, AncillaParams, Coupling, CouplingKind, ModelConfig, Param};
pub use optimize::{AncillaConstraint, IterationRecord, OptConfig, OptState};
