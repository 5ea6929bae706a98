//! Quasi-probability decompositions of cut wires and cut gates.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::statevector::{ProductState, StateVector};
use super::QpdError;
use crate::circuit::{Clifford1Q, Clifford2Q, Gate};
use crate::pauli::{Pauli, PauliString};

/// Coefficients below this magnitude are dropped from a decomposition.
const COEFF_DROP: f64 = 1e-15;

/// A single-qubit operation applied on one side of a cut gate.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LocalOp {
    Clifford(Clifford1Q),
    /// `exp(-i·angle·P/2)`.
    Rotate {
        axis: Pauli,
        angle: f64,
    },
    /// Signed projective measurement `ρ ↦ P₊ρP₊ − P₋ρP₋`.
    Measure(Pauli),
}

/// One term of a gate-cut decomposition: independent local operations on
/// the first and second qubit of the gate, weighted by `coeff`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCutTerm {
    pub coeff: f64,
    pub first: Vec<LocalOp>,
    pub second: Vec<LocalOp>,
}

/// One term of a wire-cut decomposition: measure `measure` on the upstream
/// segment, prepare `prepare` on the downstream one.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireCutTerm {
    pub coeff: f64,
    pub measure: Pauli,
    pub prepare: ProductState,
}

/// The identity channel as a signed sum of measure-and-prepare terms.
pub fn wire_cut_terms() -> Vec<WireCutTerm> {
    use ProductState::*;
    let t = |measure, prepare, coeff| WireCutTerm {
        coeff,
        measure,
        prepare,
    };
    vec![
        t(Pauli::I, Zero, 0.5),
        t(Pauli::I, One, 0.5),
        t(Pauli::X, Plus, 0.5),
        t(Pauli::X, Minus, -0.5),
        t(Pauli::Y, PlusI, 0.5),
        t(Pauli::Y, MinusI, -0.5),
        t(Pauli::Z, Zero, 0.5),
        t(Pauli::Z, One, -0.5),
    ]
}

fn cz_terms() -> Vec<GateCutTerm> {
    use Clifford1Q::{Sdg, S, Z};
    use LocalOp::{Clifford as C, Measure as M};
    let t = |coeff, first: Vec<LocalOp>, second: Vec<LocalOp>| GateCutTerm {
        coeff,
        first,
        second,
    };
    vec![
        t(0.5, vec![C(S)], vec![C(S)]),
        t(0.5, vec![C(Sdg)], vec![C(Sdg)]),
        t(0.5, vec![M(Pauli::Z)], vec![]),
        t(-0.5, vec![M(Pauli::Z)], vec![C(Z)]),
        t(0.5, vec![], vec![M(Pauli::Z)]),
        t(-0.5, vec![C(Z)], vec![M(Pauli::Z)]),
    ]
}

fn pauli_gate(p: Pauli) -> Vec<LocalOp> {
    match p {
        Pauli::I => vec![],
        Pauli::X => vec![LocalOp::Clifford(Clifford1Q::X)],
        Pauli::Y => vec![LocalOp::Clifford(Clifford1Q::Y)],
        Pauli::Z => vec![LocalOp::Clifford(Clifford1Q::Z)],
    }
}

/// Terms for `exp(-i·angle·A⊗B/2)`.
fn rotation_terms(a: Pauli, b: Pauli, angle: f64) -> Vec<GateCutTerm> {
    let phi = -angle / 2.0;
    let (c, s) = (phi.cos(), phi.sin());
    let m = |p| vec![LocalOp::Measure(p)];
    // e^{±iπ/4 P} is a rotation by ∓π/2
    let plus = |p| {
        vec![LocalOp::Rotate {
            axis: p,
            angle: -FRAC_PI_2,
        }]
    };
    let minus = |p| {
        vec![LocalOp::Rotate {
            axis: p,
            angle: FRAC_PI_2,
        }]
    };
    let t = |coeff, first, second| GateCutTerm {
        coeff,
        first,
        second,
    };
    let cs = c * s;
    let terms = vec![
        t(c * c, vec![], vec![]),
        t(s * s, pauli_gate(a), pauli_gate(b)),
        t(cs, m(a), plus(b)),
        t(-cs, m(a), minus(b)),
        t(cs, plus(a), m(b)),
        t(-cs, minus(a), m(b)),
    ];
    terms
        .into_iter()
        .filter(|t| t.coeff.abs() > COEFF_DROP)
        .collect()
}

/// Decomposition of a two-qubit gate into local terms. `first` acts on the
/// first qubit listed by [`Gate::qubits`].
pub fn gate_cut_terms(gate: &Gate) -> Result<Vec<GateCutTerm>, QpdError> {
    match gate {
        Gate::Clifford2Q {
            kind: Clifford2Q::CZ,
            ..
        } => Ok(cz_terms()),
        Gate::Clifford2Q {
            kind: Clifford2Q::CX,
            ..
        } => {
            let h = LocalOp::Clifford(Clifford1Q::H);
            Ok(cz_terms()
                .into_iter()
                .map(|mut t| {
                    t.second.insert(0, h);
                    t.second.push(h);
                    t
                })
                .collect())
        }
        Gate::PauliRotation { axis, angle } if axis.weight() == 2 => {
            let qs = axis.support();
            Ok(rotation_terms(axis.get(qs[0]), axis.get(qs[1]), *angle))
        }
        _ => Err(QpdError::UncuttableGate(gate.to_string())),
    }
}

/// Apply a local operation on qubit `q` of every branch. Measurements split
/// each branch in two with opposite signs.
pub fn apply_local(branches: &mut Vec<(f64, StateVector)>, q: usize, op: &LocalOp) {
    match op {
        LocalOp::Clifford(kind) => branches
            .iter_mut()
            .for_each(|(_, psi)| psi.apply_clifford1(*kind, q)),
        LocalOp::Rotate { axis, angle } => {
            let n = branches.first().map_or(0, |b| b.1.num_qubits());
            let word = PauliString::single(n, q, *axis).expect("qubit in range");
            branches
                .iter_mut()
                .for_each(|(_, psi)| psi.apply_rotation(&word, *angle));
        }
        LocalOp::Measure(p) => {
            let old = std::mem::take(branches);
            for (sign, psi) in old {
                let mut minus = psi.clone();
                let mut plus = psi;
                plus.project(q, *p, true);
                minus.project(q, *p, false);
                branches.push((sign, plus));
                branches.push((-sign, minus));
            }
        }
    }
}
