//! Circuit cutting with operator backpropagation.
//!
//! The pipeline conjugates an observable backwards through the tail of a
//! circuit while its qubit-wise commuting group count stays within a budget,
//! cuts the remaining prefix into smaller subcircuits, and counts the circuit
//! executions the cut requires. A simulated-annealing search picks the group
//! budget that minimizes that count. A dense statevector simulator and exact
//! quasi-probability reconstruction check every step.

pub mod anneal;
pub mod bench;
pub mod circuit;
pub mod cut;
pub mod grouping;
pub mod obp;
pub mod observable;
pub mod pauli;
pub mod qpd;
pub mod util;

pub use circuit::{
    Circuit, CircuitError, Clifford1Q, Clifford2Q, Gate, Slice, SliceKind, SlicePolicy,
};
pub use grouping::{group_qwc, QwcGrouping};
pub use observable::{Observable, ObservableError, PauliTerm};
pub use pauli::{Pauli, PauliError, PauliString, Phase};
