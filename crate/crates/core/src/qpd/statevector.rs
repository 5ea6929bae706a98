//! Dense statevector simulator, the exact oracle for every other path.
//!
//! Qubit `j` is bit `j` of the amplitude index.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::QpdError;
use crate::circuit::{Circuit, Clifford1Q, Clifford2Q, Gate};
use crate::observable::Observable;
use crate::pauli::{Pauli, PauliString};

/// Default largest register the simulator accepts.
pub const DEFAULT_QUBIT_LIMIT: usize = 20;

/// Largest imaginary part tolerated in an expectation value.
pub const IMAG_TOLERANCE: f64 = 1e-10;

const PAR_THRESHOLD: usize = 1 << 14;

type M2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn clifford_matrix(kind: Clifford1Q) -> M2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let (p, m) = (C64::new(0.5, 0.5), C64::new(0.5, -0.5));
    match kind {
        Clifford1Q::H => [[h, h], [h, -h]],
        Clifford1Q::S => [[ONE, ZERO], [ZERO, I]],
        Clifford1Q::Sdg => [[ONE, ZERO], [ZERO, -I]],
        Clifford1Q::X => [[ZERO, ONE], [ONE, ZERO]],
        Clifford1Q::Y => [[ZERO, -I], [I, ZERO]],
        Clifford1Q::Z => [[ONE, ZERO], [ZERO, -ONE]],
        Clifford1Q::SX => [[p, m], [m, p]],
        Clifford1Q::SXdg => [[m, p], [p, m]],
    }
}

fn letter_matrix(p: Pauli) -> M2 {
    match p {
        Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
        Pauli::X => clifford_matrix(Clifford1Q::X),
        Pauli::Y => clifford_matrix(Clifford1Q::Y),
        Pauli::Z => clifford_matrix(Clifford1Q::Z),
    }
}

/// Single-qubit eigenstates used as initial states and cut preparations.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProductState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl ProductState {
    /// Gates preparing the state from `|0>`.
    pub fn preparation(self) -> &'static [Clifford1Q] {
        use Clifford1Q::*;
        match self {
            ProductState::Zero => &[],
            ProductState::One => &[X],
            ProductState::Plus => &[H],
            ProductState::Minus => &[X, H],
            ProductState::PlusI => &[H, S],
            ProductState::MinusI => &[X, H, S],
        }
    }

    pub fn amplitudes(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            ProductState::Zero => [ONE, ZERO],
            ProductState::One => [ZERO, ONE],
            ProductState::Plus => [C64::new(h, 0.0), C64::new(h, 0.0)],
            ProductState::Minus => [C64::new(h, 0.0), C64::new(-h, 0.0)],
            ProductState::PlusI => [C64::new(h, 0.0), C64::new(0.0, h)],
            ProductState::MinusI => [C64::new(h, 0.0), C64::new(0.0, -h)],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

fn check_width(n: usize, limit: usize) -> Result<(), QpdError> {
    if n > limit || n > 63 {
        return Err(QpdError::TooManyQubits {
            n,
            limit: limit.min(63),
        });
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>` on `n` qubits, refusing registers above `limit`.
    pub fn zero(n: usize, limit: usize) -> Result<Self, QpdError> {
        check_width(n, limit)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    /// Tensor product of single-qubit states, `states[j]` on qubit `j`.
    pub fn product(states: &[ProductState], limit: usize) -> Result<Self, QpdError> {
        let amps: Vec<[C64; 2]> = states.iter().map(|s| s.amplitudes()).collect();
        Self::product_of(&amps, limit)
    }

    /// Tensor product of arbitrary single-qubit amplitude pairs, normalized
    /// per qubit.
    pub fn product_of(states: &[[C64; 2]], limit: usize) -> Result<Self, QpdError> {
        let n = states.len();
        check_width(n, limit)?;
        let mut amps = vec![ONE];
        for (j, s) in states.iter().enumerate() {
            let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(QpdError::InvalidState(j));
            }
            let (a, b) = (s[0] / norm, s[1] / norm);
            let mut next = vec![ZERO; 1 << (j + 1)];
            for (i, &v) in amps.iter().enumerate() {
                next[i] = v * a;
                next[i | (1 << j)] = v * b;
            }
            amps = next;
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a 2x2 matrix to qubit `q`.
    pub fn apply_matrix(&mut self, q: usize, m: &M2) {
        let half = 1 << q;
        let kernel = |chunk: &mut [C64]| {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks_mut(2 * half).for_each(kernel);
        } else {
            self.amps.chunks_mut(2 * half).for_each(kernel);
        }
    }

    pub fn apply_clifford1(&mut self, kind: Clifford1Q, q: usize) {
        self.apply_matrix(q, &clifford_matrix(kind));
    }

    /// Apply the Pauli word `p` as an operator.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let (x, z) = (p.x_bits_u64(), p.z_bits_u64());
        let phase = I.powu((x & z).count_ones() % 4);
        let src = std::mem::take(&mut self.amps);
        self.amps = (0..src.len())
            .map(|b| {
                let s = b ^ x as usize;
                let sign = if (s as u64 & z).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                src[s] * phase * sign
            })
            .collect();
    }

    /// `exp(-i·angle·P/2)`.
    pub fn apply_rotation(&mut self, axis: &PauliString, angle: f64) {
        let (x, z) = (axis.x_bits_u64(), axis.z_bits_u64());
        let phase = I.powu((x & z).count_ones() % 4);
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        let src = std::mem::take(&mut self.amps);
        let at = |b: usize| {
            let t = b ^ x as usize;
            let sign = if (t as u64 & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            src[b] * c - I * s * phase * sign * src[t]
        };
        self.amps = if src.len() >= PAR_THRESHOLD {
            (0..src.len()).into_par_iter().map(at).collect()
        } else {
            (0..src.len()).map(at).collect()
        };
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        match gate {
            Gate::Clifford1Q { kind, qubit } => self.apply_clifford1(*kind, *qubit),
            Gate::Rz { angle, qubit } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                self.apply_matrix(*qubit, &[[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]]);
            }
            Gate::Clifford2Q {
                kind,
                control,
                target,
            } => {
                let (cm, tm) = (1usize << control, 1usize << target);
                match kind {
                    Clifford2Q::CZ => {
                        for (i, a) in self.amps.iter_mut().enumerate() {
                            if i & cm != 0 && i & tm != 0 {
                                *a = -*a;
                            }
                        }
                    }
                    Clifford2Q::CX => {
                        for i in 0..self.amps.len() {
                            if i & cm != 0 && i & tm == 0 {
                                self.amps.swap(i, i | tm);
                            }
                        }
                    }
                }
            }
            Gate::PauliRotation { axis, angle } => self.apply_rotation(axis, *angle),
        }
    }

    /// Replace the state by `(I + sign·P)/2` applied on qubit `q`, unnormalized.
    pub fn project(&mut self, q: usize, letter: Pauli, positive: bool) {
        let p = letter_matrix(letter);
        let sgn = if positive { 0.5 } else { -0.5 };
        let m = [
            [0.5 * ONE + sgn * p[0][0], sgn * p[0][1]],
            [sgn * p[1][0], 0.5 * ONE + sgn * p[1][1]],
        ];
        self.apply_matrix(q, &m);
    }

    /// `<psi|P|psi>` without normalization.
    pub fn pauli_expectation(&self, p: &PauliString) -> C64 {
        let (x, z) = (p.x_bits_u64() as usize, p.z_bits_u64() as usize);
        let phase = I.powu((x & z).count_ones() % 4);
        let term = |(b, a): (usize, &C64)| {
            let sign = if (b & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            self.amps[b ^ x].conj() * *a * sign
        };
        let sum: C64 = if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter().enumerate().map(term).sum()
        } else {
            self.amps.iter().enumerate().map(term).sum()
        };
        sum * phase
    }

    /// Real expectation of a Hermitian observable.
    pub fn expectation(&self, obs: &Observable) -> Result<f64, QpdError> {
        if obs.num_qubits() != self.n {
            return Err(QpdError::SizeMismatch {
                state: self.n,
                obs: obs.num_qubits(),
            });
        }
        let value: C64 = if obs.len() > 16 && self.amps.len() < PAR_THRESHOLD {
            obs.terms()
                .par_iter()
                .map(|t| t.coeff * self.pauli_expectation(&t.word))
                .sum()
        } else {
            obs.terms()
                .iter()
                .map(|t| t.coeff * self.pauli_expectation(&t.word))
                .sum()
        };
        if value.im.abs() > IMAG_TOLERANCE {
            return Err(QpdError::ImaginaryExpectation(value.im));
        }
        Ok(value.re)
    }
}

/// Run `circuit` from `|0...0>`.
pub fn simulate(circuit: &Circuit, limit: usize) -> Result<StateVector, QpdError> {
    simulate_from(circuit, StateVector::zero(circuit.num_qubits(), limit)?)
}

/// Run `circuit` from `initial`.
pub fn simulate_from(circuit: &Circuit, mut initial: StateVector) -> Result<StateVector, QpdError> {
    if initial.num_qubits() != circuit.num_qubits() {
        return Err(QpdError::SizeMismatch {
            state: initial.num_qubits(),
            obs: circuit.num_qubits(),
        });
    }
    for g in circuit.gates() {
        initial.apply_gate(g);
    }
    Ok(initial)
}

/// `<0|U† O U|0>` for the circuit `U`.
pub fn exact_expectation(
    circuit: &Circuit,
    obs: &Observable,
    limit: usize,
) -> Result<f64, QpdError> {
    simulate(circuit, limit)?.expectation(obs)
}
