//! Independent dense reference simulator and random instance helpers.
//!
//! Gates act through explicit 2x2 and 4x4 matrices and Pauli words act
//! letter by letter, so nothing here shares code with the library's
//! symplectic simulator.

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use obpcut::circuit::{random_circuit, RandomCircuitSpec};
use obpcut::{Circuit, Clifford1Q, Clifford2Q, Gate, Observable, Pauli, PauliString, PauliTerm};
use rand::Rng;

pub type M2 = [[C64; 2]; 2];

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_matrix(p: Pauli) -> M2 {
    match p {
        Pauli::I => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        Pauli::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        Pauli::Y => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        Pauli::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

pub fn clifford_matrix(kind: Clifford1Q) -> M2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    match kind {
        Clifford1Q::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        Clifford1Q::S => [[c(1.0, 0.0), z], [z, c(0.0, 1.0)]],
        Clifford1Q::Sdg => [[c(1.0, 0.0), z], [z, c(0.0, -1.0)]],
        Clifford1Q::X => pauli_matrix(Pauli::X),
        Clifford1Q::Y => pauli_matrix(Pauli::Y),
        Clifford1Q::Z => pauli_matrix(Pauli::Z),
        Clifford1Q::SX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        Clifford1Q::SXdg => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
    }
}

/// `exp(-i·angle·P/2)` for a single letter.
pub fn rotation_matrix(p: Pauli, angle: f64) -> M2 {
    let m = pauli_matrix(p);
    let (cos, sin) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            let id = if r == k { cos } else { 0.0 };
            out[r][k] = c(id, 0.0) - c(0.0, sin) * m[r][k];
        }
    }
    out
}

pub fn apply_1q(psi: &mut [C64], q: usize, m: &M2) {
    let bit = 1 << q;
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (a, b) = (psi[i], psi[i | bit]);
            psi[i] = m[0][0] * a + m[0][1] * b;
            psi[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// `P|psi>` applied one letter at a time.
pub fn apply_word(psi: &[C64], word: &PauliString) -> Vec<C64> {
    let mut out = psi.to_vec();
    for q in 0..word.num_qubits() {
        let p = word.get(q);
        if p != Pauli::I {
            apply_1q(&mut out, q, &pauli_matrix(p));
        }
    }
    out
}

pub fn apply_gate(psi: &mut [C64], gate: &Gate) {
    match gate {
        Gate::Clifford1Q { kind, qubit } => apply_1q(psi, *qubit, &clifford_matrix(*kind)),
        Gate::Rz { angle, qubit } => apply_1q(psi, *qubit, &rotation_matrix(Pauli::Z, *angle)),
        Gate::Clifford2Q {
            kind,
            control,
            target,
        } => {
            let (cb, tb) = (1 << control, 1 << target);
            for i in 0..psi.len() {
                if i & cb != 0 && i & tb == 0 {
                    match kind {
                        Clifford2Q::CX => psi.swap(i, i | tb),
                        Clifford2Q::CZ => psi[i | tb] = -psi[i | tb],
                    }
                }
            }
        }
        Gate::PauliRotation { axis, angle } => {
            let p = apply_word(psi, axis);
            let (cos, sin) = ((angle / 2.0).cos(), (angle / 2.0).sin());
            for (a, b) in psi.iter_mut().zip(p) {
                *a = *a * cos - c(0.0, sin) * b;
            }
        }
    }
}

pub fn zero_state(n: usize) -> Vec<C64> {
    let mut psi = vec![c(0.0, 0.0); 1 << n];
    psi[0] = c(1.0, 0.0);
    psi
}

/// Tensor product of normalized single-qubit states, qubit 0 least significant.
pub fn product_state(states: &[[C64; 2]]) -> Vec<C64> {
    let mut psi = vec![c(1.0, 0.0)];
    for s in states {
        let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
        let mut next = vec![c(0.0, 0.0); psi.len() * 2];
        let half = psi.len();
        for (i, a) in psi.iter().enumerate() {
            next[i] = a * s[0] / norm;
            next[i + half] = a * s[1] / norm;
        }
        psi = next;
    }
    psi
}

pub fn run(circuit: &Circuit, mut psi: Vec<C64>) -> Vec<C64> {
    for g in circuit.gates() {
        apply_gate(&mut psi, g);
    }
    psi
}

pub fn expectation(psi: &[C64], obs: &Observable) -> C64 {
    obs.terms()
        .iter()
        .map(|t| {
            let p = apply_word(psi, &t.word);
            t.coeff * psi.iter().zip(&p).map(|(a, b)| a.conj() * b).sum::<C64>()
        })
        .sum()
}

pub fn dense_expectation(circuit: &Circuit, obs: &Observable, initial: Option<&[[C64; 2]]>) -> f64 {
    let psi = match initial {
        Some(s) => product_state(s),
        None => zero_state(circuit.num_qubits()),
    };
    let out = run(circuit, psi);
    let v = expectation(&out, obs);
    assert!(v.im.abs() < 1e-9, "imaginary expectation {v}");
    v.re
}

pub fn random_qubit_state<R: Rng>(rng: &mut R) -> [C64; 2] {
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    [
        c((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

pub fn random_word<R: Rng>(n: usize, max_weight: usize, rng: &mut R) -> PauliString {
    let weight = rng.gen_range(1..=max_weight.min(n));
    let mut qubits: Vec<usize> = (0..n).collect();
    let mut letters = Vec::new();
    for k in 0..weight {
        let j = rng.gen_range(k..n);
        qubits.swap(k, j);
        letters.push((
            qubits[k],
            [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)],
        ));
    }
    PauliString::from_sparse(n, &letters).unwrap()
}

/// Real combination of `terms` random words of weight 1 to `max_weight`.
pub fn random_observable<R: Rng>(
    n: usize,
    terms: usize,
    max_weight: usize,
    rng: &mut R,
) -> Observable {
    let terms = (0..terms)
        .map(|_| PauliTerm::new(rng.gen_range(-1.0..1.0), random_word(n, max_weight, rng)))
        .collect();
    Observable::new(n, terms).unwrap()
}

pub fn random_mixed_circuit<R: Rng>(n: usize, depth: usize, rng: &mut R) -> Circuit {
    let spec = RandomCircuitSpec {
        n,
        depth,
        two_qubit_prob: 0.4,
        clifford_prob: 0.5,
    };
    random_circuit(&spec, rng)
}
