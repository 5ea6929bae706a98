//! Weighted sums of Pauli words and their text format.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{PauliError, PauliString};

/// Terms with smaller coefficient magnitude are dropped on canonicalization.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Largest imaginary coefficient part tolerated for a Hermitian observable.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error(transparent)]
    Pauli(#[from] PauliError),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("observable has no terms, qubit count is unknown")]
    Empty,

    #[error("term {word} has imaginary coefficient {imag:e}, observable is not Hermitian")]
    NotHermitian { word: String, imag: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: C64,
    pub word: PauliString,
}

impl PauliTerm {
    pub fn new(coeff: impl Into<C64>, word: PauliString) -> Self {
        Self {
            coeff: coeff.into(),
            word,
        }
    }
}

/// A canonical sum of Pauli terms on `n` qubits.
///
/// Terms are kept sorted by word, with no duplicate words and no terms below
/// [`DROP_TOLERANCE`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl Observable {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
        }
    }

    pub fn new(n: usize, terms: Vec<PauliTerm>) -> Result<Self, ObservableError> {
        for t in &terms {
            if t.word.num_qubits() != n {
                return Err(PauliError::SizeMismatch {
                    left: n,
                    right: t.word.num_qubits(),
                }
                .into());
            }
        }
        Ok(Self::canonicalize_terms(n, terms))
    }

    pub(crate) fn from_sorted_unchecked(n: usize, terms: Vec<PauliTerm>) -> Self {
        Self { n, terms }
    }

    /// Sort, merge duplicate words and drop negligible terms.
    pub fn canonicalize(self) -> Self {
        Self::canonicalize_terms(self.n, self.terms)
    }

    pub(crate) fn canonicalize_terms(n: usize, mut terms: Vec<PauliTerm>) -> Self {
        terms.sort_by(|a, b| a.word.cmp(&b.word));
        let mut out: Vec<PauliTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.word == t.word => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff.norm() >= DROP_TOLERANCE);
        Self { n, terms: out }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn into_terms(self) -> Vec<PauliTerm> {
        self.terms
    }

    /// Sum of coefficient magnitudes; bounds the operator norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Sum of squared coefficient magnitudes.
    pub fn pauli_norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm_sqr()).sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_imag() < HERMITIAN_TOLERANCE
    }

    pub fn check_hermitian(&self) -> Result<(), ObservableError> {
        match self
            .terms
            .iter()
            .find(|t| t.coeff.im.abs() >= HERMITIAN_TOLERANCE)
        {
            Some(t) => Err(ObservableError::NotHermitian {
                word: t.word.to_string(),
                imag: t.coeff.im,
            }),
            None => Ok(()),
        }
    }

    /// Expectation value in the all-zeros computational basis state.
    pub fn zero_state_expectation(&self) -> C64 {
        self.terms
            .iter()
            .filter(|t| t.word.x_words().iter().all(|&w| w == 0))
            .map(|t| t.coeff)
            .sum()
    }

    /// Parse the line-oriented text format: `<real-coeff> <pauli-word>`.
    pub fn parse_text(text: &str) -> Result<Self, ObservableError> {
        let mut n = None;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (coeff, word) = match (fields.next(), fields.next(), fields.next()) {
                (Some(c), Some(w), None) => (c, w),
                _ => {
                    return Err(ObservableError::Parse {
                        line: line_no,
                        message: "expected `<coefficient> <pauli-word>`".into(),
                    })
                }
            };
            let coeff: f64 = coeff.parse().map_err(|_| ObservableError::Parse {
                line: line_no,
                message: format!("invalid coefficient `{coeff}`"),
            })?;
            if !coeff.is_finite() {
                return Err(ObservableError::Parse {
                    line: line_no,
                    message: "coefficient must be finite".into(),
                });
            }
            let word: PauliString =
                word.parse()
                    .map_err(|e: PauliError| ObservableError::Parse {
                        line: line_no,
                        message: e.to_string(),
                    })?;
            match n {
                None => n = Some(word.num_qubits()),
                Some(n) if n != word.num_qubits() => {
                    return Err(ObservableError::Parse {
                        line: line_no,
                        message: format!("word has {} qubits, expected {n}", word.num_qubits()),
                    })
                }
                _ => {}
            }
            terms.push(PauliTerm::new(coeff, word));
        }
        let n = n.ok_or(ObservableError::Empty)?;
        Observable::new(n, terms)
    }

    /// Emit the text format. Fails if a coefficient is not real.
    pub fn to_text(&self) -> Result<String, ObservableError> {
        self.check_hermitian()?;
        let mut out = String::new();
        for t in &self.terms {
            writeln!(out, "{} {}", t.coeff.re, t.word).unwrap();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(c: f64, w: &str) -> PauliTerm {
        PauliTerm::new(c, w.parse().unwrap())
    }

    #[test]
    fn merge_duplicates() {
        let o = Observable::new(1, vec![term(0.5, "Z"), term(0.5, "Z")]).unwrap();
        assert_eq!(o.terms(), &[term(1.0, "Z")]);
    }

    #[test]
    fn cancellation_empties() {
        let o = Observable::new(1, vec![term(1.0, "Z"), term(-1.0, "Z")]).unwrap();
        assert!(o.is_empty());
    }

    #[test]
    fn sorted_canonical_order() {
        let o = Observable::new(2, vec![term(0.25, "IZ"), term(0.75, "ZI")]).unwrap();
        let words: Vec<String> = o.terms().iter().map(|t| t.word.to_string()).collect();
        // IZ has z mask 0b10, ZI has 0b01, so ZI sorts first.
        assert_eq!(words, vec!["ZI", "IZ"]);
        assert_eq!(o.terms()[0].coeff.re, 0.75);
        assert_eq!(o.terms()[1].coeff.re, 0.25);
    }

    #[test]
    fn tiny_terms_dropped() {
        let o = Observable::new(1, vec![term(1e-15, "X"), term(1.0, "Z")]).unwrap();
        assert_eq!(o.len(), 1);
    }

    #[test]
    fn text_round_trip() {
        let text = "# average\n0.5 ZI\n\n0.5 IZ  # second\n-0.125 XY\n";
        let o = Observable::parse_text(text).unwrap();
        assert_eq!(o.num_qubits(), 2);
        assert_eq!(o.len(), 3);
        let again = Observable::parse_text(&o.to_text().unwrap()).unwrap();
        assert_eq!(again, o);
    }

    #[test]
    fn text_errors_carry_line() {
        let err = Observable::parse_text("1.0 ZZ\n0.5 Z\n").unwrap_err();
        assert!(matches!(err, ObservableError::Parse { line: 2, .. }));
        let err = Observable::parse_text("abc ZZ\n").unwrap_err();
        assert!(matches!(err, ObservableError::Parse { line: 1, .. }));
        assert_eq!(
            Observable::parse_text("# nothing\n").unwrap_err(),
            ObservableError::Empty
        );
    }

    #[test]
    fn non_hermitian_text_rejected() {
        let o = Observable::new(
            1,
            vec![PauliTerm::new(C64::new(0.0, 1.0), "Z".parse().unwrap())],
        )
        .unwrap();
        assert!(!o.is_hermitian());
        assert!(o.to_text().is_err());
    }

    #[test]
    fn size_mismatch_rejected() {
        assert!(Observable::new(2, vec![term(1.0, "Z")]).is_err());
    }
}
