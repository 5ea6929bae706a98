//! Exact execution of cut circuits by quasi-probability reconstruction.

mod decomp;
mod reconstruct;
mod statevector;

pub use decomp::{apply_local, gate_cut_terms, wire_cut_terms, GateCutTerm, LocalOp, WireCutTerm};
pub use reconstruct::{reconstruct, reconstruct_with, ReconstructOptions, Reconstruction};
pub use statevector::{
    exact_expectation, simulate, simulate_from, ProductState, StateVector, DEFAULT_QUBIT_LIMIT,
    IMAG_TOLERANCE,
};

use thiserror::Error;

use crate::cut::CutError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpdError {
    #[error("{n} qubits exceed the simulator limit of {limit}")]
    TooManyQubits { n: usize, limit: usize },

    #[error("state has {state} qubits, observable has {obs}")]
    SizeMismatch { state: usize, obs: usize },

    #[error("expectation has imaginary part {0:e}")]
    ImaginaryExpectation(f64),

    #[error("gate {0} has no cut decomposition")]
    UncuttableGate(String),

    #[error("initial state of qubit {0} is not a valid vector")]
    InvalidState(usize),

    #[error("{0} term combinations are too many to enumerate")]
    TooManyCombinations(u128),

    #[error(transparent)]
    Cut(#[from] CutError),
}
