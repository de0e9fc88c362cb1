//! Half-qubit sample-based quantum diagonalization.
//!
//! The crate covers the whole classical side of the workflow:
//!
//! * [`integrals`]: FCIDUMP parsing and the integral table.
//! * [`determinants`]: occupation bitmasks and Slater–Condon rules.
//! * [`solver`]: projected Hamiltonians, Davidson, full CI.
//! * [`lucj`]: full- and half-register LUCJ circuits, statevector
//!   simulation, sampling and readout noise.
//! * [`recovery`]: configuration recovery (valid-sample occupations, SCCR,
//!   probability-based correction) and tensor-product subspaces.
//! * [`selection`]: heat-bath style selection from sampled half-configurations
//!   and the classical variational HCI baseline.
//! * [`pipeline`]: configuration-driven runs and bond scans.

pub mod determinants;
pub mod error;
pub mod integrals;
pub mod lucj;
pub mod pipeline;
pub mod recovery;
pub mod selection;
pub mod solver;

pub use error::{Error, Result};
