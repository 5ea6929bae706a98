//! Gate-level circuit representation and slicing.

mod library;
mod qasm;

pub use library::{
    coupling_map_from_text, efficient_su2, heavy_hex_19, heisenberg_trotter, qaoa_maxcut,
    random_circuit, weight_observable, z_average, Couplings, HeisenbergParams, RandomCircuitSpec,
    WeightNormalization,
};
pub use qasm::{emit_qasm, parse_qasm, QasmError};

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{Pauli, PauliString};

/// Tolerance used to recognize rotation angles that are multiples of pi/2.
pub const CLIFFORD_ANGLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for a {n}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedQubit(usize),

    #[error("rotation axis has {axis} qubits, circuit has {n}")]
    AxisWidth { axis: usize, n: usize },

    #[error("rotation axis is the identity")]
    IdentityAxis,

    #[error("angle {0} is not finite")]
    NonFiniteAngle(f64),

    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("invalid coupling edge ({0}, {1})")]
    InvalidEdge(usize, usize),

    #[error("coupling map line {line}: {message}")]
    CouplingParse { line: usize, message: String },

    #[error("observable weight {b} out of range 1..={n}")]
    WeightOutOfRange { b: usize, n: usize },

    #[error("{0}")]
    Invalid(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clifford1Q {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    SX,
    SXdg,
}

impl Clifford1Q {
    pub const ALL: [Clifford1Q; 8] = [
        Clifford1Q::H,
        Clifford1Q::S,
        Clifford1Q::Sdg,
        Clifford1Q::X,
        Clifford1Q::Y,
        Clifford1Q::Z,
        Clifford1Q::SX,
        Clifford1Q::SXdg,
    ];

    pub fn qasm_name(self) -> &'static str {
        match self {
            Clifford1Q::H => "h",
            Clifford1Q::S => "s",
            Clifford1Q::Sdg => "sdg",
            Clifford1Q::X => "x",
            Clifford1Q::Y => "y",
            Clifford1Q::Z => "z",
            Clifford1Q::SX => "sx",
            Clifford1Q::SXdg => "sxdg",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clifford2Q {
    CX,
    CZ,
}

impl Clifford2Q {
    pub fn qasm_name(self) -> &'static str {
        match self {
            Clifford2Q::CX => "cx",
            Clifford2Q::CZ => "cz",
        }
    }
}

/// A gate. `PauliRotation` is `exp(-i·angle·axis/2)`; `Rz` is the same with a
/// single-qubit `Z` axis and is the canonical spelling of that case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Clifford1Q {
        kind: Clifford1Q,
        qubit: usize,
    },
    Rz {
        angle: f64,
        qubit: usize,
    },
    Clifford2Q {
        kind: Clifford2Q,
        control: usize,
        target: usize,
    },
    PauliRotation {
        axis: PauliString,
        angle: f64,
    },
}

/// `Some(k mod 4)` when `angle` is `k·pi/2` within [`CLIFFORD_ANGLE_TOLERANCE`].
pub fn quarter_turns(angle: f64) -> Option<u8> {
    let k = (angle / FRAC_PI_2).round();
    if (angle - k * FRAC_PI_2).abs() <= CLIFFORD_ANGLE_TOLERANCE {
        Some(k.rem_euclid(4.0) as u8)
    } else {
        None
    }
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Clifford1Q { qubit, .. } | Gate::Rz { qubit, .. } => vec![*qubit],
            Gate::Clifford2Q {
                control, target, ..
            } => vec![*control, *target],
            Gate::PauliRotation { axis, .. } => axis.support(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::Clifford1Q { .. } | Gate::Rz { .. } => 1,
            Gate::Clifford2Q { .. } => 2,
            Gate::PauliRotation { axis, .. } => axis.weight(),
        }
    }

    pub fn acts_on(&self, q: usize) -> bool {
        match self {
            Gate::Clifford1Q { qubit, .. } | Gate::Rz { qubit, .. } => *qubit == q,
            Gate::Clifford2Q {
                control, target, ..
            } => *control == q || *target == q,
            Gate::PauliRotation { axis, .. } => q < axis.num_qubits() && axis.get(q) != Pauli::I,
        }
    }

    /// Rotation angle for parameterized gates.
    pub fn angle(&self) -> Option<f64> {
        match self {
            Gate::Rz { angle, .. } | Gate::PauliRotation { angle, .. } => Some(*angle),
            _ => None,
        }
    }

    /// Rotations by multiples of pi/2 are Clifford.
    pub fn is_clifford(&self) -> bool {
        match self {
            Gate::Clifford1Q { .. } | Gate::Clifford2Q { .. } => true,
            Gate::Rz { angle, .. } | Gate::PauliRotation { angle, .. } => {
                quarter_turns(*angle).is_some()
            }
        }
    }

    /// The rotation axis as a word on `n` qubits, for `Rz` and `PauliRotation`.
    pub fn rotation_axis(&self, n: usize) -> Option<PauliString> {
        match self {
            Gate::Rz { qubit, .. } => PauliString::single(n, *qubit, Pauli::Z).ok(),
            Gate::PauliRotation { axis, .. } => Some(axis.clone()),
            _ => None,
        }
    }

    /// Same gate with qubits renamed through `map` on a register of `n` qubits.
    pub fn remap(&self, n: usize, map: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::Clifford1Q { kind, qubit } => Gate::Clifford1Q {
                kind: *kind,
                qubit: map(*qubit),
            },
            Gate::Rz { angle, qubit } => Gate::Rz {
                angle: *angle,
                qubit: map(*qubit),
            },
            Gate::Clifford2Q {
                kind,
                control,
                target,
            } => Gate::Clifford2Q {
                kind: *kind,
                control: map(*control),
                target: map(*target),
            },
            Gate::PauliRotation { axis, angle } => {
                let mut out = PauliString::identity(n);
                for q in axis.support() {
                    out.set_unchecked(map(q), axis.get(q));
                }
                Gate::PauliRotation {
                    axis: out,
                    angle: *angle,
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Clifford1Q { kind, qubit } => write!(f, "{} q{qubit}", kind.qasm_name()),
            Gate::Rz { angle, qubit } => write!(f, "rz({angle}) q{qubit}"),
            Gate::Clifford2Q {
                kind,
                control,
                target,
            } => write!(f, "{} q{control},q{target}", kind.qasm_name()),
            Gate::PauliRotation { axis, angle } => write!(f, "exp(-i·{angle}/2·{axis})"),
        }
    }
}

/// An ordered gate list on `n` qubits. There are no measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(
        n: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn check_qubit(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.n {
            return Err(CircuitError::QubitOutOfRange {
                qubit: q,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Append a validated gate. Single-qubit `Z` rotations are stored as `Rz`.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        if let Some(a) = gate.angle() {
            if !a.is_finite() {
                return Err(CircuitError::NonFiniteAngle(a));
            }
        }
        let gate = match gate {
            Gate::Clifford1Q { qubit, .. } | Gate::Rz { qubit, .. } => {
                self.check_qubit(qubit)?;
                gate
            }
            Gate::Clifford2Q {
                control, target, ..
            } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(CircuitError::RepeatedQubit(control));
                }
                gate
            }
            Gate::PauliRotation { axis, angle } => {
                if axis.num_qubits() != self.n {
                    return Err(CircuitError::AxisWidth {
                        axis: axis.num_qubits(),
                        n: self.n,
                    });
                }
                let support = axis.support();
                match support.as_slice() {
                    [] => return Err(CircuitError::IdentityAxis),
                    [q] if axis.get(*q) == Pauli::Z => Gate::Rz { angle, qubit: *q },
                    _ => Gate::PauliRotation { axis, angle },
                }
            }
        };
        self.gates.push(gate);
        Ok(())
    }

    pub fn clifford(&mut self, kind: Clifford1Q, qubit: usize) -> Result<&mut Self, CircuitError> {
        self.push(Gate::Clifford1Q { kind, qubit })?;
        Ok(self)
    }

    pub fn h(&mut self, qubit: usize) -> Result<&mut Self, CircuitError> {
        self.clifford(Clifford1Q::H, qubit)
    }

    pub fn sx(&mut self, qubit: usize) -> Result<&mut Self, CircuitError> {
        self.clifford(Clifford1Q::SX, qubit)
    }

    pub fn rz(&mut self, angle: f64, qubit: usize) -> Result<&mut Self, CircuitError> {
        self.push(Gate::Rz { angle, qubit })?;
        Ok(self)
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self, CircuitError> {
        self.push(Gate::Clifford2Q {
            kind: Clifford2Q::CX,
            control,
            target,
        })?;
        Ok(self)
    }

    pub fn cz(&mut self, control: usize, target: usize) -> Result<&mut Self, CircuitError> {
        self.push(Gate::Clifford2Q {
            kind: Clifford2Q::CZ,
            control,
            target,
        })?;
        Ok(self)
    }

    /// `exp(-i·angle·P/2)` with `P` given by `(qubit, letter)` pairs.
    pub fn rotation(
        &mut self,
        letters: &[(usize, Pauli)],
        angle: f64,
    ) -> Result<&mut Self, CircuitError> {
        for &(q, _) in letters {
            self.check_qubit(q)?;
        }
        let axis = PauliString::from_sparse(self.n, letters)
            .map_err(|e| CircuitError::Invalid(e.to_string()))?;
        self.push(Gate::PauliRotation { axis, angle })?;
        Ok(self)
    }

    /// The first `len` gates.
    pub fn prefix(&self, len: usize) -> Circuit {
        Circuit {
            n: self.n,
            gates: self.gates[..len].to_vec(),
        }
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.arity() == 2).count()
    }

    pub fn non_clifford_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_clifford()).count()
    }

    /// Slice the gate list into contiguous, order-preserving ranges.
    pub fn slices(&self, policy: SlicePolicy) -> Vec<Slice> {
        let mut out: Vec<Slice> = Vec::new();
        let mut layer_qubits: Vec<bool> = vec![false; self.n];
        let mut open: Option<OpenSlice> = None;
        for (i, g) in self.gates.iter().enumerate() {
            let clifford = g.is_clifford();
            let layered = match policy {
                SlicePolicy::PerGate => false,
                SlicePolicy::PerLayer => true,
                SlicePolicy::Mixed => clifford,
            };
            let qs = g.qubits();
            if let Some(s) = open.as_mut() {
                let fits = layered && s.layered && qs.iter().all(|&q| !layer_qubits[q]);
                if fits {
                    s.end = i + 1;
                    s.clifford &= clifford;
                    qs.iter().for_each(|&q| layer_qubits[q] = true);
                    continue;
                }
                out.push(open.take().unwrap().into());
            }
            layer_qubits.iter_mut().for_each(|b| *b = false);
            qs.iter().for_each(|&q| layer_qubits[q] = true);
            open = Some(OpenSlice {
                start: i,
                end: i + 1,
                clifford,
                layered,
            });
        }
        if let Some(s) = open {
            out.push(s.into());
        }
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SlicePolicy {
    /// One gate per slice.
    PerGate,
    /// Maximal runs of gates on pairwise disjoint qubits.
    PerLayer,
    /// Layers of Clifford gates; every non-Clifford gate alone.
    #[default]
    Mixed,
}

impl std::str::FromStr for SlicePolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-gate" => Ok(SlicePolicy::PerGate),
            "per-layer" => Ok(SlicePolicy::PerLayer),
            "mixed" => Ok(SlicePolicy::Mixed),
            other => Err(format!(
                "unknown slice policy `{other}` (per-gate | per-layer | mixed)"
            )),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceKind {
    AllClifford,
    ContainsNonClifford,
}

/// Gates `start..end` of a circuit.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub start: usize,
    pub end: usize,
    pub kind: SliceKind,
}

struct OpenSlice {
    start: usize,
    end: usize,
    clifford: bool,
    layered: bool,
}

impl From<OpenSlice> for Slice {
    fn from(s: OpenSlice) -> Self {
        Slice {
            start: s.start,
            end: s.end,
            kind: if s.clifford {
                SliceKind::AllClifford
            } else {
                SliceKind::ContainsNonClifford
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turn_recognition() {
        use std::f64::consts::PI;
        assert_eq!(quarter_turns(0.0), Some(0));
        assert_eq!(quarter_turns(PI / 2.0), Some(1));
        assert_eq!(quarter_turns(3.0 * PI), Some(2));
        assert_eq!(quarter_turns(7.0 * PI / 2.0), Some(3));
        assert_eq!(quarter_turns(-PI / 2.0), Some(3));
        assert_eq!(quarter_turns(0.3), None);
        assert_eq!(quarter_turns(PI / 2.0 + 1e-9), None);
    }

    #[test]
    fn push_validates() {
        let mut c = Circuit::new(2);
        assert!(c.cx(0, 0).is_err());
        assert!(c.h(2).is_err());
        assert!(c.rz(f64::NAN, 0).is_err());
        assert!(c.rotation(&[], 0.1).is_err());
        c.rotation(&[(1, Pauli::Z)], 0.4).unwrap();
        assert_eq!(
            c.gates()[0],
            Gate::Rz {
                angle: 0.4,
                qubit: 1
            }
        );
    }

    #[test]
    fn per_gate_slices() {
        let mut c = Circuit::new(1);
        c.h(0).unwrap().rz(0.3, 0).unwrap().h(0).unwrap();
        assert_eq!(c.slices(SlicePolicy::PerGate).len(), 3);
    }

    #[test]
    fn per_layer_merges_disjoint_gates() {
        let mut c = Circuit::new(3);
        c.h(0).unwrap().rz(0.3, 1).unwrap().sx(2).unwrap();
        let s = c.slices(SlicePolicy::PerLayer);
        assert_eq!(s.len(), 1);
        assert_eq!(
            (s[0].start, s[0].end, s[0].kind),
            (0, 3, SliceKind::ContainsNonClifford)
        );
    }

    #[test]
    fn empty_circuit_has_no_slices() {
        assert!(Circuit::new(4).slices(SlicePolicy::Mixed).is_empty());
    }

    #[test]
    fn mixed_isolates_non_clifford() {
        let mut c = Circuit::new(3);
        c.h(0)
            .unwrap()
            .h(1)
            .unwrap()
            .rz(0.2, 2)
            .unwrap()
            .cx(0, 1)
            .unwrap()
            .rz(std::f64::consts::PI, 2)
            .unwrap();
        let s = c.slices(SlicePolicy::Mixed);
        let ranges: Vec<(usize, usize)> = s.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(ranges, vec![(0, 2), (2, 3), (3, 5)]);
        assert_eq!(s[2].kind, SliceKind::AllClifford);
    }

    #[test]
    fn slices_partition_in_order() {
        let mut c = Circuit::new(3);
        c.h(0)
            .unwrap()
            .cx(0, 1)
            .unwrap()
            .cx(1, 2)
            .unwrap()
            .rz(0.1, 0)
            .unwrap()
            .h(2)
            .unwrap();
        for policy in [
            SlicePolicy::PerGate,
            SlicePolicy::PerLayer,
            SlicePolicy::Mixed,
        ] {
            let s = c.slices(policy);
            assert_eq!(s[0].start, 0);
            assert_eq!(s.last().unwrap().end, c.len());
            for w in s.windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
        }
    }
}
