//! Cut plans: partitioning a circuit into independent subcircuits with gate
//! and wire cuts, and counting the executions a plan costs.
//!
//! A wire cut at `(qubit, position)` splits the qubit's timeline immediately
//! before gate `position`, giving the qubit one more segment. Every segment
//! carries a subcircuit label. A two-qubit gate whose endpoints sit in
//! segments with different labels is a gate cut.

mod extract;
mod search;

pub use extract::{extract_subcircuits, SubObservable, SubOp, SubWire, Subcircuit};
pub use search::find_cuts;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::grouping::{group_count_of_words, qwc_group_count};
use crate::observable::Observable;
use crate::pauli::PauliString;

/// Execution factor of one gate cut.
pub const GATE_CUT_FACTOR: u128 = 9;
/// Execution factor of one wire cut.
pub const WIRE_CUT_FACTOR: u128 = 16;
/// Terms in the gate-cut decomposition of a CX or CZ gate.
pub const GATE_CUT_TERMS: u128 = 6;
/// Terms in the measure-and-prepare decomposition of a wire.
pub const WIRE_CUT_TERMS: u128 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error(
        "gate {index} acts on {arity} qubits; only one- and two-qubit gates can be cut around"
    )]
    UnsupportedGate { index: usize, arity: usize },

    #[error("unsatisfiable constraint: {0}")]
    Unsatisfiable(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("observable has {obs} qubits, circuit has {circuit}")]
    SizeMismatch { obs: usize, circuit: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutConstraint {
    /// Every subcircuit has at most this many wires.
    MaxQubits(usize),
    /// Split into two nonempty sides of any size.
    Bipartition,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutOptions {
    pub constraint: CutConstraint,
    pub seed: u64,
}

impl CutOptions {
    pub fn max_qubits(m: usize) -> Self {
        Self {
            constraint: CutConstraint::MaxQubits(m),
            seed: 0,
        }
    }

    pub fn bipartition() -> Self {
        Self {
            constraint: CutConstraint::Bipartition,
            seed: 0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WireCut {
    pub qubit: usize,
    /// The cut sits immediately before this gate, which acts on `qubit`.
    pub position: usize,
}

/// Number of gate and wire cuts, ordered by `9^kg · 16^kw`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CutCount {
    pub kg: usize,
    pub kw: usize,
}

impl CutCount {
    pub fn log_overhead(&self) -> f64 {
        self.kg as f64 * 9f64.ln() + self.kw as f64 * 16f64.ln()
    }

    /// `9^kg · 16^kw`, saturating.
    pub fn overhead(&self) -> u128 {
        sat_pow(GATE_CUT_FACTOR, self.kg).saturating_mul(sat_pow(WIRE_CUT_FACTOR, self.kw))
    }
}

impl Ord for CutCount {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.log_overhead()
            .total_cmp(&other.log_overhead())
            .then((self.kg, self.kw).cmp(&(other.kg, other.kw)))
    }
}

impl PartialOrd for CutCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn sat_pow(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlan {
    pub num_qubits: usize,
    /// `partition[q][k]` labels segment `k` of qubit `q`.
    pub partition: Vec<Vec<usize>>,
    /// Sorted by qubit, then position.
    pub wire_cuts: Vec<WireCut>,
    /// Indices of cut two-qubit gates, ascending.
    pub gate_cuts: Vec<usize>,
    pub num_subcircuits: usize,
}

impl CutPlan {
    /// One subcircuit holding the whole circuit.
    pub fn uncut(circuit: &Circuit) -> CutPlan {
        let n = circuit.num_qubits();
        CutPlan {
            num_qubits: n,
            partition: vec![vec![0]; n],
            wire_cuts: Vec::new(),
            gate_cuts: Vec::new(),
            num_subcircuits: 1,
        }
        .relabeled(circuit)
    }

    pub fn counts(&self) -> CutCount {
        CutCount {
            kg: self.gate_cuts.len(),
            kw: self.wire_cuts.len(),
        }
    }

    /// Positions of the wire cuts on `qubit`, ascending.
    pub fn cut_positions(&self, qubit: usize) -> Vec<usize> {
        self.wire_cuts
            .iter()
            .filter(|c| c.qubit == qubit)
            .map(|c| c.position)
            .collect()
    }

    /// Segment index of `qubit` at gate `index`.
    pub fn segment_at(&self, qubit: usize, index: usize) -> usize {
        self.wire_cuts
            .iter()
            .filter(|c| c.qubit == qubit && c.position <= index)
            .count()
    }

    pub fn label_at(&self, qubit: usize, index: usize) -> usize {
        self.partition[qubit][self.segment_at(qubit, index)]
    }

    /// Label of the last segment of `qubit`, where it is measured.
    pub fn final_label(&self, qubit: usize) -> usize {
        *self.partition[qubit]
            .last()
            .expect("every qubit has a segment")
    }

    /// Wires per subcircuit: the number of segments carrying each label.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![0; self.num_subcircuits];
        for segs in &self.partition {
            for &l in segs {
                w[l] += 1;
            }
        }
        w
    }

    /// Build a plan from wire cuts and segment labels: derive the gate cuts,
    /// then split and renumber labels by connected component so that every
    /// subcircuit is connected and labels appear in (qubit, segment) order.
    pub(crate) fn assemble(
        circuit: &Circuit,
        mut wire_cuts: Vec<WireCut>,
        partition: Vec<Vec<usize>>,
    ) -> CutPlan {
        wire_cuts.sort();
        let s = partition
            .iter()
            .flatten()
            .map(|&l| l + 1)
            .max()
            .unwrap_or(0);
        CutPlan {
            num_qubits: circuit.num_qubits(),
            partition,
            wire_cuts,
            gate_cuts: Vec::new(),
            num_subcircuits: s,
        }
        .relabeled(circuit)
    }

    fn segment_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.num_qubits + 1);
        let mut acc = 0;
        for segs in &self.partition {
            off.push(acc);
            acc += segs.len();
        }
        off.push(acc);
        off
    }

    /// Connected components of segments joined by same-label gates and by
    /// uncut wire continuations.
    fn components(&self, circuit: &Circuit) -> Vec<usize> {
        let off = self.segment_offsets();
        let mut uf = UnionFind::new(off[self.num_qubits]);
        for (segs, &base) in self.partition.iter().zip(&off) {
            for k in 1..segs.len() {
                if segs[k] == segs[k - 1] {
                    uf.union(base + k - 1, base + k);
                }
            }
        }
        for (i, g) in circuit.gates().iter().enumerate() {
            let qs = g.qubits();
            if qs.len() == 2 && self.label_at(qs[0], i) == self.label_at(qs[1], i) {
                uf.union(
                    off[qs[0]] + self.segment_at(qs[0], i),
                    off[qs[1]] + self.segment_at(qs[1], i),
                );
            }
        }
        (0..off[self.num_qubits]).map(|v| uf.find(v)).collect()
    }

    fn relabeled(mut self, circuit: &Circuit) -> CutPlan {
        let comp = self.components(circuit);
        let mut renumber: Vec<Option<usize>> = vec![None; comp.len()];
        let mut next = 0;
        let mut flat = 0;
        for q in 0..self.num_qubits {
            for k in 0..self.partition[q].len() {
                let root = comp[flat];
                let label = *renumber[root].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                self.partition[q][k] = label;
                flat += 1;
            }
        }
        self.num_subcircuits = next;
        self.gate_cuts = circuit
            .gates()
            .iter()
            .enumerate()
            .filter(|(i, g)| {
                let qs = g.qubits();
                qs.len() == 2 && self.label_at(qs[0], *i) != self.label_at(qs[1], *i)
            })
            .map(|(i, _)| i)
            .collect();
        self
    }

    /// Check the plan against the circuit it claims to cut.
    pub fn validate(&self, circuit: &Circuit) -> Result<(), CutError> {
        let bad = |m: String| Err(CutError::InvalidPlan(m));
        if self.num_qubits != circuit.num_qubits() || self.partition.len() != self.num_qubits {
            return bad(format!(
                "plan covers {} qubits, circuit has {}",
                self.partition.len(),
                circuit.num_qubits()
            ));
        }
        for (i, g) in circuit.gates().iter().enumerate() {
            if g.arity() > 2 {
                return Err(CutError::UnsupportedGate {
                    index: i,
                    arity: g.arity(),
                });
            }
        }
        let mut sorted = self.wire_cuts.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != self.wire_cuts {
            return bad("wire cuts must be sorted and distinct".into());
        }
        for c in &self.wire_cuts {
            if c.qubit >= self.num_qubits || c.position >= circuit.len() {
                return bad(format!("wire cut {c:?} is out of range"));
            }
            if !circuit.gates()[c.position].acts_on(c.qubit) {
                return bad(format!(
                    "wire cut {c:?} is not placed before a gate on its qubit"
                ));
            }
        }
        for q in 0..self.num_qubits {
            let positions = self.cut_positions(q);
            if self.partition[q].len() != positions.len() + 1 {
                return bad(format!(
                    "qubit {q} has {} cuts but {} labels",
                    positions.len(),
                    self.partition[q].len()
                ));
            }
            let gates_on_q: Vec<usize> = (0..circuit.len())
                .filter(|&i| circuit.gates()[i].acts_on(q))
                .collect();
            // an idle qubit without cuts is a valid one-wire subcircuit
            let mut lo = 0;
            for (k, &p) in positions
                .iter()
                .chain(std::iter::once(&circuit.len()))
                .enumerate()
                .filter(|_| !positions.is_empty())
            {
                if !gates_on_q.iter().any(|&i| i >= lo && i < p) {
                    return bad(format!("segment {k} of qubit {q} has no gates"));
                }
                lo = p;
            }
            for k in 1..self.partition[q].len() {
                if self.partition[q][k] == self.partition[q][k - 1] {
                    return bad(format!(
                        "wire cut on qubit {q} separates segments with the same label"
                    ));
                }
            }
        }
        let labels: Vec<usize> = self.partition.iter().flatten().copied().collect();
        if labels.iter().any(|&l| l >= self.num_subcircuits) {
            return bad("label out of range".into());
        }
        let expected: Vec<usize> = circuit
            .gates()
            .iter()
            .enumerate()
            .filter(|(i, g)| {
                let qs = g.qubits();
                qs.len() == 2 && self.label_at(qs[0], *i) != self.label_at(qs[1], *i)
            })
            .map(|(i, _)| i)
            .collect();
        if expected != self.gate_cuts {
            return bad(format!(
                "gate cuts {:?} do not match the labelled crossings {expected:?}",
                self.gate_cuts
            ));
        }
        // Labels must be exactly the connected components.
        let comp = self.components(circuit);
        let mut comp_label: std::collections::BTreeMap<usize, usize> = Default::default();
        let mut label_comp: std::collections::BTreeMap<usize, usize> = Default::default();
        for (&c, &l) in comp.iter().zip(&labels) {
            if *comp_label.entry(c).or_insert(l) != l || *label_comp.entry(l).or_insert(c) != c {
                return bad(
                    "labels do not match the connected components of the cut circuit".into(),
                );
            }
        }
        if label_comp.len() != self.num_subcircuits {
            return bad("some subcircuit label is unused".into());
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Weighted qubit interaction graph: `(u, v, count)` with `u < v`, sorted.
pub fn interaction_graph(circuit: &Circuit) -> Vec<(usize, usize, usize)> {
    let mut counts: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    for g in circuit.gates() {
        let qs = g.qubits();
        for i in 0..qs.len() {
            for j in (i + 1)..qs.len() {
                let key = (qs[i].min(qs[j]), qs[i].max(qs[j]));
                *counts.entry(key).or_default() += 1;
            }
        }
    }
    counts.into_iter().map(|((u, v), c)| (u, v, c)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcircuitCost {
    pub width: usize,
    /// QWC groups of the subobservable.
    pub groups: usize,
    /// Product of the factors of the cuts incident to this subcircuit.
    pub executions_per_group: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub kg: usize,
    pub kw: usize,
    /// QWC group count of the observable.
    pub groups: usize,
    /// `groups · 9^kg · 16^kw`, saturating.
    pub total_executions: u128,
    pub per_subcircuit: Option<Vec<SubcircuitCost>>,
    /// `Σ g_i · η_i` over subcircuits, when per-subcircuit mode ran.
    pub per_subcircuit_total: Option<u128>,
    /// Term combinations enumerated by exact reconstruction, `6^kg · 8^kw`.
    pub qpd_combinations: u128,
}

/// Global accounting `G · 9^kg · 16^kw` with `G` the QWC group count of `obs`
/// (at least one, since even a constant observable is read out once).
pub fn total_executions(counts: CutCount, groups: usize) -> u128 {
    (groups as u128).saturating_mul(counts.overhead())
}

/// Global cost of running `plan` to estimate `obs`.
pub fn cost(plan: &CutPlan, obs: &Observable) -> Result<CostReport, CutError> {
    if obs.num_qubits() != plan.num_qubits {
        return Err(CutError::SizeMismatch {
            obs: obs.num_qubits(),
            circuit: plan.num_qubits,
        });
    }
    let counts = plan.counts();
    let groups = qwc_group_count(obs).max(1);
    Ok(CostReport {
        kg: counts.kg,
        kw: counts.kw,
        groups,
        total_executions: total_executions(counts, groups),
        per_subcircuit: None,
        per_subcircuit_total: None,
        qpd_combinations: sat_pow(GATE_CUT_TERMS, counts.kg)
            .saturating_mul(sat_pow(WIRE_CUT_TERMS, counts.kw)),
    })
}

/// Per-subcircuit `(g_i, η_i)`: groups of the subobservable measured at the
/// end of subcircuit `i`, and the product of the factors of its cuts.
fn subcircuit_costs(plan: &CutPlan, circuit: &Circuit, obs: &Observable) -> Vec<SubcircuitCost> {
    let s = plan.num_subcircuits;
    let widths = plan.widths();
    let mut eta = vec![1u128; s];
    for c in &plan.wire_cuts {
        let k = plan.segment_at(c.qubit, c.position);
        for l in [plan.partition[c.qubit][k - 1], plan.partition[c.qubit][k]] {
            eta[l] = eta[l].saturating_mul(WIRE_CUT_FACTOR);
        }
    }
    for &i in &plan.gate_cuts {
        for q in circuit.gates()[i].qubits() {
            let l = plan.label_at(q, i);
            eta[l] = eta[l].saturating_mul(GATE_CUT_FACTOR);
        }
    }
    (0..s)
        .map(|l| {
            let qubits: Vec<usize> = (0..plan.num_qubits)
                .filter(|&q| plan.final_label(q) == l)
                .collect();
            let words: Vec<PauliString> = obs
                .terms()
                .iter()
                .map(|t| t.word.restrict(&qubits))
                .collect();
            SubcircuitCost {
                width: widths[l],
                groups: group_count_of_words(&words),
                executions_per_group: eta[l],
            }
        })
        .collect()
}

/// [`cost`] with the per-subcircuit accounting filled in, using the circuit
/// to attribute gate cuts to both of their subcircuits.
pub fn cost_with_circuit(
    plan: &CutPlan,
    circuit: &Circuit,
    obs: &Observable,
) -> Result<CostReport, CutError> {
    plan.validate(circuit)?;
    let mut report = cost(plan, obs)?;
    let subs = subcircuit_costs(plan, circuit, obs);
    report.per_subcircuit_total = Some(subs.iter().fold(0u128, |acc, s| {
        acc.saturating_add((s.groups as u128).saturating_mul(s.executions_per_group))
    }));
    report.per_subcircuit = Some(subs);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::z_average;

    #[test]
    fn worked_cost_numbers() {
        assert_eq!(total_executions(CutCount { kg: 2, kw: 1 }, 1), 1296);
        assert_eq!(total_executions(CutCount { kg: 1, kw: 1 }, 2), 288);
        assert_eq!(total_executions(CutCount { kg: 0, kw: 0 }, 1), 1);
    }

    #[test]
    fn cost_is_strictly_monotone() {
        for kg in 0..5 {
            for kw in 0..5 {
                for g in 1..5 {
                    let base = total_executions(CutCount { kg, kw }, g);
                    assert!(total_executions(CutCount { kg: kg + 1, kw }, g) > base);
                    assert!(total_executions(CutCount { kg, kw: kw + 1 }, g) > base);
                    assert!(total_executions(CutCount { kg, kw }, g + 1) > base);
                }
            }
        }
    }

    #[test]
    fn cut_count_order_follows_overhead() {
        let a = CutCount { kg: 2, kw: 0 };
        let b = CutCount { kg: 0, kw: 1 };
        assert!(b < a);
        assert!(CutCount { kg: 1, kw: 0 } < b);
    }

    #[test]
    fn interaction_graph_weights() {
        let mut c = Circuit::new(4);
        c.cz(0, 1).unwrap().cz(1, 2).unwrap().cz(2, 3).unwrap();
        assert_eq!(interaction_graph(&c), vec![(0, 1, 1), (1, 2, 1), (2, 3, 1)]);
        let mut c = Circuit::new(2);
        c.cx(0, 1).unwrap().cx(1, 0).unwrap();
        assert_eq!(interaction_graph(&c), vec![(0, 1, 2)]);
        let mut c = Circuit::new(3);
        c.h(0).unwrap();
        assert!(interaction_graph(&c).is_empty());
    }

    #[test]
    fn uncut_plan_splits_components() {
        let mut c = Circuit::new(4);
        c.cz(0, 2).unwrap().h(1).unwrap().cx(3, 1).unwrap();
        let p = CutPlan::uncut(&c);
        assert_eq!(p.num_subcircuits, 2);
        assert_eq!(p.partition, vec![vec![0], vec![1], vec![0], vec![1]]);
        p.validate(&c).unwrap();
    }

    #[test]
    fn hand_built_plan_and_costs() {
        // q0 talks to q1, then q1 talks to q2; cut q1 between them.
        let mut c = Circuit::new(3);
        c.cz(0, 1).unwrap().cz(1, 2).unwrap().cz(0, 2).unwrap();
        let plan = CutPlan::assemble(
            &c,
            vec![WireCut {
                qubit: 1,
                position: 1,
            }],
            vec![vec![0], vec![0, 1], vec![1]],
        );
        plan.validate(&c).unwrap();
        assert_eq!(plan.gate_cuts, vec![2]);
        assert_eq!(plan.counts(), CutCount { kg: 1, kw: 1 });
        let obs = z_average(3, &[0, 1, 2]).unwrap();
        let r = cost_with_circuit(&plan, &c, &obs).unwrap();
        assert_eq!(r.total_executions, 9 * 16);
        assert_eq!(r.qpd_combinations, 6 * 8);
        let subs = r.per_subcircuit.unwrap();
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].executions_per_group, 9 * 16);
        assert_eq!(subs[1].executions_per_group, 9 * 16);
        assert_eq!(subs[0].width, 2);
        assert_eq!(subs[1].width, 2);
    }

    #[test]
    fn validate_rejects_corruption() {
        let mut c = Circuit::new(3);
        c.cz(0, 1).unwrap().cz(1, 2).unwrap();
        let good = CutPlan::assemble(&c, vec![], vec![vec![0], vec![0], vec![1]]);
        good.validate(&c).unwrap();
        let mut bad = good.clone();
        bad.gate_cuts.clear();
        assert!(bad.validate(&c).is_err());
        let mut bad = good.clone();
        bad.partition[2] = vec![0];
        assert!(bad.validate(&c).is_err());
        let mut bad = good.clone();
        bad.wire_cuts.push(WireCut {
            qubit: 0,
            position: 1,
        });
        assert!(bad.validate(&c).is_err());
    }
}
