//! Direction estimation on permutation-invariant qubit states.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin_algebra`] holds total-spin sectors, Schur-parameterised states and the
//!   single-particle reduction of a sector state.
//! * [`fidelity`] collects the closed-form estimation fidelities and cloning shrink
//!   factors.
//! * [`optimal_states`] constructs the symmetric, known-structure and
//!   unknown-structure optimal states at fixed local Bloch length.
//! * [`oracle`] is a dense brute-force layer (coupled basis, `2^N` density matrices,
//!   covariant measurement quadrature) used to check every closed form at small `N`.
//! * [`curve`] and [`verify`] assemble fidelity curves and verification reports for
//!   the command-line front end.
//!
//! Inner loops over grid points, quadrature nodes and random trials go through
//! [`Execution`], which uses rayon when the `parallel` feature is enabled and falls
//! back to plain iteration otherwise.

pub mod curve;
mod error;
mod exec;
pub mod fidelity;
pub mod optimal_states;
pub mod oracle;
pub mod sampling;
pub mod spin_algebra;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fidelity::{EstimationFidelity, FidelityFamily, ReflectionRule, Structure};
pub use spin_algebra::{BlochVector, SchurEntry, SchurState, SectorState, SpinSector};
