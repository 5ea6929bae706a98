//! Turning a cut plan into standalone subcircuits.

use serde::{Deserialize, Serialize};

use super::{CutError, CutPlan};
use crate::circuit::{Circuit, Gate};
use crate::grouping::group_count_of_words;
use crate::observable::Observable;
use crate::pauli::PauliString;

/// One wire of a subcircuit: a segment of an original qubit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubWire {
    pub qubit: usize,
    pub segment: usize,
    /// Wire cut (index into `plan.wire_cuts`) whose preparation starts this wire.
    pub prepared_by: Option<usize>,
    /// Wire cut whose measurement ends this wire.
    pub measured_by: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SubOp {
    /// An uncut gate, on local wire indices.
    Gate(Gate),
    /// One endpoint of a cut gate. `cut` indexes `plan.gate_cuts`; `first`
    /// tells whether this is the gate's first qubit.
    GateCutHalf {
        cut: usize,
        wire: usize,
        first: bool,
    },
}

/// The observable seen by one subcircuit: every original term restricted to
/// the wires measured at its end, in the original term order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubObservable {
    pub words: Vec<PauliString>,
}

impl SubObservable {
    pub fn group_count(&self) -> usize {
        group_count_of_words(&self.words)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subcircuit {
    pub label: usize,
    pub wires: Vec<SubWire>,
    pub ops: Vec<SubOp>,
    pub observable: SubObservable,
}

impl Subcircuit {
    pub fn width(&self) -> usize {
        self.wires.len()
    }

    /// The uncut gates as a circuit, when the subcircuit has no cut gates.
    pub fn plain_circuit(&self) -> Option<Circuit> {
        let gates = self.ops.iter().map(|op| match op {
            SubOp::Gate(g) => Some(g.clone()),
            SubOp::GateCutHalf { .. } => None,
        });
        let gates: Option<Vec<Gate>> = gates.collect();
        Circuit::from_gates(self.width(), gates?).ok()
    }
}

/// Split `circuit` into the subcircuits of `plan`, one per label.
///
/// Local wires are ordered by `(qubit, segment)`. Cut gates become
/// [`SubOp::GateCutHalf`] placeholders on both sides.
pub fn extract_subcircuits(
    circuit: &Circuit,
    plan: &CutPlan,
    obs: &Observable,
) -> Result<Vec<Subcircuit>, CutError> {
    plan.validate(circuit)?;
    if obs.num_qubits() != circuit.num_qubits() {
        return Err(CutError::SizeMismatch {
            obs: obs.num_qubits(),
            circuit: circuit.num_qubits(),
        });
    }
    let s = plan.num_subcircuits;
    let mut subs: Vec<Subcircuit> = (0..s)
        .map(|label| Subcircuit {
            label,
            wires: Vec::new(),
            ops: Vec::new(),
            observable: SubObservable { words: Vec::new() },
        })
        .collect();
    // local[q][k]: index of segment k of qubit q within its subcircuit
    let mut local: Vec<Vec<usize>> = Vec::with_capacity(plan.num_qubits);
    for q in 0..plan.num_qubits {
        let cut_ids: Vec<usize> = (0..plan.wire_cuts.len())
            .filter(|&i| plan.wire_cuts[i].qubit == q)
            .collect();
        let mut row = Vec::new();
        for (k, &label) in plan.partition[q].iter().enumerate() {
            let sub = &mut subs[label];
            row.push(sub.wires.len());
            sub.wires.push(SubWire {
                qubit: q,
                segment: k,
                prepared_by: k.checked_sub(1).map(|j| cut_ids[j]),
                measured_by: cut_ids.get(k).copied(),
            });
        }
        local.push(row);
    }
    let cut_index = |gate: usize| plan.gate_cuts.binary_search(&gate).ok();
    for (i, g) in circuit.gates().iter().enumerate() {
        let qs = g.qubits();
        let place = |q: usize| {
            let k = plan.segment_at(q, i);
            (plan.partition[q][k], local[q][k])
        };
        if let Some(cut) = cut_index(i) {
            for (j, &q) in qs.iter().enumerate() {
                let (label, wire) = place(q);
                subs[label].ops.push(SubOp::GateCutHalf {
                    cut,
                    wire,
                    first: j == 0,
                });
            }
            continue;
        }
        let (label, _) = place(qs[0]);
        let width = subs[label].wires.len();
        let remapped = g.remap(width, |q| place(q).1);
        subs[label].ops.push(SubOp::Gate(remapped));
    }
    for (label, sub) in subs.iter_mut().enumerate() {
        let measured: Vec<(usize, usize)> = (0..plan.num_qubits)
            .filter(|&q| plan.final_label(q) == label)
            .map(|q| (q, *local[q].last().unwrap()))
            .collect();
        sub.observable.words = obs
            .terms()
            .iter()
            .map(|t| {
                let mut w = PauliString::identity(sub.wires.len());
                for &(q, wire) in &measured {
                    w.set_unchecked(wire, t.word.get(q));
                }
                w
            })
            .collect();
    }
    Ok(subs)
}
