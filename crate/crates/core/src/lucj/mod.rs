//! LUCJ circuits as an abstract gate list, their statevector simulation and
//! measurement sampling.
//!
//! The full circuit acts on `2·norb` qubits (α register then β register).
//! The half circuit acts on the α register alone, with opposite-spin
//! couplings folded onto same-spin gates.

mod circuit;
mod init;
mod optimize;
mod params;
mod samples;
mod statevector;

pub use circuit::{
    build_full_circuit, build_half_circuit, gate_stats, givens_network, CircuitIR, CouplingMap, Gate, GateStats,
};
pub use init::{mp2_doubles, mp2_parameters, orbital_energies, orthogonal_log};
pub use optimize::{circuit_energy, optimize_parameters, OptimizeOptions, OptimizeResult};
pub use params::{LucjLayer, LucjParameters, ParameterFile};
pub use samples::{bits_to_string, string_to_bits, SampleSet};
pub use statevector::{
    amplitude, apply_readout_noise, energy_expectation, hf_occupation, sample, simulate_statevector, simulate_with_cap,
    DEFAULT_QUBIT_CAP,
};
