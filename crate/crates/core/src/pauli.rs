//! Symplectic Pauli words.
//!
//! A word on `n` qubits is stored as two bit masks: `x` and `z`. Qubit `q`
//! carries `I` when both bits are clear, `X` for `(1, 0)`, `Z` for `(0, 1)`
//! and `Y` for `(1, 1)`. The operator represented by a word is always the
//! Hermitian tensor product of the letters, so `Y = i·X·Z` per qubit.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid Pauli letter {letter:?} at position {position}")]
    InvalidLetter { letter: char, position: usize },

    #[error("qubit {qubit} out of range for a {n}-qubit word")]
    QubitOutOfRange { qubit: usize, n: usize },
}

/// Single-qubit Pauli letter.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A power of `i`: `Phase(k)` is `i^k` with `k` taken mod 4.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// A Pauli word over a fixed number of qubits.
///
/// The derived ordering compares `x` masks first and then `z` masks, each
/// lexicographically from the word holding qubits `0..64` upward. This is the
/// canonical term order used by [`crate::Observable`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
        }
    }

    /// Word with a single non-identity letter.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Result<Self, PauliError> {
        let mut p = Self::identity(n);
        p.set(qubit, letter)?;
        Ok(p)
    }

    /// Build a word from `(qubit, letter)` pairs; unspecified qubits are `I`.
    pub fn from_sparse(n: usize, letters: &[(usize, Pauli)]) -> Result<Self, PauliError> {
        let mut p = Self::identity(n);
        for &(q, l) in letters {
            p.set(q, l)?;
        }
        Ok(p)
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_unchecked(q, l);
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        assert!(
            qubit < self.n,
            "qubit {qubit} out of range for {} qubits",
            self.n
        );
        self.letter_unchecked(qubit)
    }

    pub(crate) fn letter_unchecked(&self, qubit: usize) -> Pauli {
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, letter: Pauli) -> Result<(), PauliError> {
        if qubit >= self.n {
            return Err(PauliError::QubitOutOfRange { qubit, n: self.n });
        }
        self.set_unchecked(qubit, letter);
        Ok(())
    }

    pub(crate) fn set_unchecked(&mut self, qubit: usize, letter: Pauli) {
        let (w, b) = (qubit / WORD, qubit % WORD);
        let (xb, zb) = letter.bits();
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | if xb { mask } else { 0 };
        self.z[w] = (self.z[w] & !mask) | if zb { mask } else { 0 };
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.letter_unchecked(q) != Pauli::I)
            .collect()
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones())
            .sum()
    }

    /// Low 64 bits of the x mask; used by the dense simulator (n <= 64).
    pub fn x_bits_u64(&self) -> u64 {
        self.x.first().copied().unwrap_or(0)
    }

    pub fn z_bits_u64(&self) -> u64 {
        self.z.first().copied().unwrap_or(0)
    }

    fn check_size(&self, other: &Self) -> Result<(), PauliError> {
        if self.n != other.n {
            return Err(PauliError::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Operator product `self · other = phase · word`.
    pub fn multiply(&self, other: &Self) -> Result<(Phase, PauliString), PauliError> {
        self.check_size(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> (Phase, PauliString) {
        // With P = i^{x·z} X^x Z^z per qubit:
        // X^a Z^b X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}.
        let mut exp: u32 = 0;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (x3, z3) = (x1 ^ x2, z1 ^ z2);
            exp += (x1 & z1).count_ones() + (x2 & z2).count_ones() + 2 * (z1 & x2).count_ones();
            exp += 4 * 64 - (x3 & z3).count_ones();
            x.push(x3);
            z.push(z3);
        }
        (Phase::from_exponent(exp), PauliString { n: self.n, x, z })
    }

    /// True iff the symplectic inner product is even.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// True iff at every qubit the letters agree or one of them is `I`.
    pub fn qubitwise_commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_size(other)?;
        Ok(self.qwc_unchecked(other))
    }

    pub(crate) fn qwc_unchecked(&self, other: &Self) -> bool {
        (0..self.x.len()).all(|i| {
            let both = (self.x[i] | self.z[i]) & (other.x[i] | other.z[i]);
            let differ = (self.x[i] ^ other.x[i]) | (self.z[i] ^ other.z[i]);
            both & differ == 0
        })
    }

    /// Copy the letters of `self` at `qubits` into a new word of width `qubits.len()`.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(qubits.len());
        for (local, &q) in qubits.iter().enumerate() {
            out.set_unchecked(local, self.letter_unchecked(q));
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.letter_unchecked(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Leftmost character is qubit 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .chars()
            .enumerate()
            .map(|(i, c)| {
                Pauli::from_char(c).ok_or(PauliError::InvalidLetter {
                    letter: c,
                    position: i,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliString::from_letters(&letters))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
