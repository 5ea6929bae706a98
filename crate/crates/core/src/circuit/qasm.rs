//! OpenQASM 2.0 subset: reader and canonical writer.
//!
//! Besides the standard gates `h s sdg x y z sx sxdg rz cx cz`, names made of
//! `r` followed by one Pauli letter per qubit argument (`rx`, `rzz`, `rzx`,
//! ...) denote `exp(-i·θ·P/2)` with the letters applied to the arguments in
//! order. `barrier`, `creg` and `include` are accepted and ignored.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, Clifford1Q, Clifford2Q, Gate};
use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct QasmError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str,
    Sym(char),
    Arrow,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let err = |message: String| QasmError {
            line: start.0,
            column: start.1,
            message,
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let begin = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[begin..i].iter().collect())
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[begin..i].iter().collect();
            Tok::Number(
                s.parse()
                    .map_err(|_| err(format!("invalid number `{s}`")))?,
            )
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(err("unterminated string".into()));
            }
            i += 1;
            Tok::Str
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            Tok::Arrow
        } else if "[](),;+-*/{}".contains(c) {
            i += 1;
            Tok::Sym(c)
        } else {
            return Err(err(format!("unexpected character `{c}`")));
        };
        col += i - begin;
        out.push(Token {
            tok,
            line: start.0,
            column: start.1,
        });
    }
    Ok(out)
}

struct Register {
    name: String,
    offset: usize,
    size: usize,
}

/// A qubit argument: a single qubit or a whole register.
enum Arg {
    Qubit(usize),
    Register(usize, usize),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    qregs: Vec<Register>,
    cregs: Vec<String>,
    gates: Vec<Gate>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.column))
            .unwrap_or(self.eof)
    }

    fn err_at(&self, at: (usize, usize), message: impl Into<String>) -> QasmError {
        QasmError {
            line: at.0,
            column: at.1,
            message: message.into(),
        }
    }

    fn err(&self, message: impl Into<String>) -> QasmError {
        self.err_at(self.here(), message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{c}`"))),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn integer(&mut self) -> Result<usize, QasmError> {
        let at = self.here();
        match self.next() {
            Some(Tok::Number(v)) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            _ => Err(self.err_at(at, "expected non-negative integer")),
        }
    }

    fn skip_statement(&mut self) -> Result<(), QasmError> {
        while let Some(t) = self.next() {
            if t == Tok::Sym(';') {
                return Ok(());
            }
        }
        Err(self.err_at(self.eof, "expected `;`"))
    }

    fn program(&mut self) -> Result<(), QasmError> {
        while self.pos < self.toks.len() {
            let at = self.here();
            let word = self.ident()?;
            match word.as_str() {
                "OPENQASM" => {
                    let v = self.next();
                    if !matches!(v, Some(Tok::Number(x)) if x == 2.0) {
                        return Err(self.err_at(at, "only OPENQASM 2.0 is supported"));
                    }
                    self.expect_sym(';')?;
                }
                "include" => {
                    if self.next() != Some(Tok::Str) {
                        return Err(self.err_at(at, "expected file name after include"));
                    }
                    self.expect_sym(';')?;
                }
                "qreg" | "creg" => {
                    let name = self.ident()?;
                    self.expect_sym('[')?;
                    let size = self.integer()?;
                    self.expect_sym(']')?;
                    self.expect_sym(';')?;
                    if self.qregs.iter().any(|r| r.name == name) || self.cregs.contains(&name) {
                        return Err(self.err_at(at, format!("register `{name}` declared twice")));
                    }
                    if word == "qreg" {
                        if !self.gates.is_empty() {
                            return Err(self.err_at(at, "qreg declared after the first gate"));
                        }
                        let offset = self.qregs.iter().map(|r| r.size).sum();
                        self.qregs.push(Register { name, offset, size });
                    } else {
                        self.cregs.push(name);
                    }
                }
                "barrier" => self.skip_statement()?,
                "measure" => return Err(self.err_at(at, "mid-circuit measurement unsupported")),
                "reset" | "if" | "gate" | "opaque" => {
                    return Err(self.err_at(at, format!("`{word}` is not supported")));
                }
                _ => self.gate(&word, at)?,
            }
        }
        Ok(())
    }

    fn arg(&mut self) -> Result<Arg, QasmError> {
        let at = self.here();
        let name = self.ident()?;
        let reg = self
            .qregs
            .iter()
            .find(|r| r.name == name)
            .map(|r| (r.offset, r.size))
            .ok_or_else(|| self.err_at(at, format!("unknown quantum register `{name}`")))?;
        if self.eat_sym('[') {
            let at = self.here();
            let k = self.integer()?;
            self.expect_sym(']')?;
            if k >= reg.1 {
                return Err(self.err_at(
                    at,
                    format!("index {k} out of range for `{name}[{}]`", reg.1),
                ));
            }
            Ok(Arg::Qubit(reg.0 + k))
        } else {
            Ok(Arg::Register(reg.0, reg.1))
        }
    }

    fn gate(&mut self, name: &str, at: (usize, usize)) -> Result<(), QasmError> {
        let mut params = Vec::new();
        if self.eat_sym('(') && !self.eat_sym(')') {
            loop {
                params.push(self.expr()?);
                if self.eat_sym(')') {
                    break;
                }
                self.expect_sym(',')?;
            }
        }
        let mut args = vec![self.arg()?];
        while self.eat_sym(',') {
            args.push(self.arg()?);
        }
        self.expect_sym(';')?;

        let kind = GateKind::resolve(name, args.len()).map_err(|m| self.err_at(at, m))?;
        let want = usize::from(kind.takes_angle());
        if params.len() != want {
            return Err(self.err_at(
                at,
                format!("`{name}` takes {want} parameter(s), got {}", params.len()),
            ));
        }
        let width = args
            .iter()
            .filter_map(|a| match a {
                Arg::Register(_, s) => Some(*s),
                Arg::Qubit(_) => None,
            })
            .try_fold(None, |acc: Option<usize>, s| match acc {
                Some(w) if w != s => Err(()),
                _ => Ok(Some(s)),
            })
            .map_err(|_| self.err_at(at, "broadcast over registers of different sizes"))?;
        let n: usize = self.qregs.iter().map(|r| r.size).sum();
        for k in 0..width.unwrap_or(1) {
            let qs: Vec<usize> = args
                .iter()
                .map(|a| match a {
                    Arg::Qubit(q) => *q,
                    Arg::Register(off, _) => off + k,
                })
                .collect();
            for i in 0..qs.len() {
                if qs[i + 1..].contains(&qs[i]) {
                    return Err(self.err_at(at, format!("repeated qubit argument in `{name}`")));
                }
            }
            let gate = kind.build(n, &qs, params.first().copied());
            self.gates.push(gate);
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.factor()?;
        loop {
            if self.eat_sym('*') {
                v *= self.factor()?;
            } else if self.eat_sym('/') {
                v /= self.factor()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64, QasmError> {
        let at = self.here();
        match self.next() {
            Some(Tok::Sym('-')) => Ok(-self.factor()?),
            Some(Tok::Sym('+')) => self.factor(),
            Some(Tok::Number(v)) => Ok(v),
            Some(Tok::Ident(s)) if s == "pi" => Ok(std::f64::consts::PI),
            Some(Tok::Sym('(')) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            _ => Err(self.err_at(at, "expected angle expression")),
        }
    }
}

enum GateKind {
    Clifford1(Clifford1Q),
    Clifford2(Clifford2Q),
    Rz,
    Rotation(Vec<Pauli>),
}

impl GateKind {
    fn resolve(name: &str, arity: usize) -> Result<GateKind, String> {
        let kind = match name {
            "h" => GateKind::Clifford1(Clifford1Q::H),
            "s" => GateKind::Clifford1(Clifford1Q::S),
            "sdg" => GateKind::Clifford1(Clifford1Q::Sdg),
            "x" => GateKind::Clifford1(Clifford1Q::X),
            "y" => GateKind::Clifford1(Clifford1Q::Y),
            "z" => GateKind::Clifford1(Clifford1Q::Z),
            "sx" => GateKind::Clifford1(Clifford1Q::SX),
            "sxdg" => GateKind::Clifford1(Clifford1Q::SXdg),
            "cx" | "CX" => GateKind::Clifford2(Clifford2Q::CX),
            "cz" => GateKind::Clifford2(Clifford2Q::CZ),
            "rz" => GateKind::Rz,
            _ => match name.strip_prefix('r') {
                Some(rest)
                    if !rest.is_empty() && rest.chars().all(|c| matches!(c, 'x' | 'y' | 'z')) =>
                {
                    GateKind::Rotation(
                        rest.chars()
                            .map(|c| Pauli::from_char(c.to_ascii_uppercase()).unwrap())
                            .collect(),
                    )
                }
                _ => return Err(format!("unsupported gate `{name}`")),
            },
        };
        let want = match &kind {
            GateKind::Clifford1(_) | GateKind::Rz => 1,
            GateKind::Clifford2(_) => 2,
            GateKind::Rotation(l) => l.len(),
        };
        if want != arity {
            return Err(format!("`{name}` acts on {want} qubit(s), got {arity}"));
        }
        Ok(kind)
    }

    fn takes_angle(&self) -> bool {
        matches!(self, GateKind::Rz | GateKind::Rotation(_))
    }

    fn build(&self, n: usize, qs: &[usize], angle: Option<f64>) -> Gate {
        match self {
            GateKind::Clifford1(kind) => Gate::Clifford1Q {
                kind: *kind,
                qubit: qs[0],
            },
            GateKind::Clifford2(kind) => Gate::Clifford2Q {
                kind: *kind,
                control: qs[0],
                target: qs[1],
            },
            GateKind::Rz => Gate::Rz {
                angle: angle.unwrap(),
                qubit: qs[0],
            },
            GateKind::Rotation(letters) => {
                let pairs: Vec<(usize, Pauli)> =
                    qs.iter().copied().zip(letters.iter().copied()).collect();
                Gate::PauliRotation {
                    axis: PauliString::from_sparse(n, &pairs).expect("in range"),
                    angle: angle.unwrap(),
                }
            }
        }
    }
}

/// Parse an OpenQASM 2.0 program in the supported subset.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1);
    let mut p = Parser {
        toks,
        pos: 0,
        eof: (lines, 1),
        qregs: Vec::new(),
        cregs: Vec::new(),
        gates: Vec::new(),
    };
    p.program()?;
    if p.qregs.is_empty() {
        return Err(QasmError {
            line: 1,
            column: 1,
            message: "no qreg declared".into(),
        });
    }
    let n = p.qregs.iter().map(|r| r.size).sum();
    let mut c = Circuit::new(n);
    for g in p.gates {
        c.push(g).map_err(|e| QasmError {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
    }
    Ok(c)
}

/// Emit a canonical program over a single register `q`. Angles are written
/// with round-trip precision so that parsing the output reproduces the circuit.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    writeln!(out, "qreg q[{}];", circuit.num_qubits()).unwrap();
    for g in circuit.gates() {
        match g {
            Gate::Clifford1Q { kind, qubit } => writeln!(out, "{} q[{qubit}];", kind.qasm_name()),
            Gate::Rz { angle, qubit } => writeln!(out, "rz({angle:?}) q[{qubit}];"),
            Gate::Clifford2Q {
                kind,
                control,
                target,
            } => {
                writeln!(out, "{} q[{control}],q[{target}];", kind.qasm_name())
            }
            Gate::PauliRotation { axis, angle } => {
                let support = axis.support();
                let name: String = support
                    .iter()
                    .map(|&q| axis.get(q).as_char().to_ascii_lowercase())
                    .collect();
                let args: Vec<String> = support.iter().map(|q| format!("q[{q}]")).collect();
                writeln!(out, "r{name}({angle:?}) {};", args.join(","))
            }
        }
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

    #[test]
    fn rz_half_pi_is_clifford() {
        let c = parse_qasm(&format!("{HEADER}qreg q[1];\nrz(pi/2) q[0];\n")).unwrap();
        assert_eq!(
            c.gates(),
            &[Gate::Rz {
                angle: PI / 2.0,
                qubit: 0
            }]
        );
        assert!(c.gates()[0].is_clifford());
    }

    #[test]
    fn cx_gate() {
        let c = parse_qasm(&format!("{HEADER}qreg q[2];\ncx q[0],q[1];\n")).unwrap();
        assert_eq!(
            c.gates(),
            &[Gate::Clifford2Q {
                kind: Clifford2Q::CX,
                control: 0,
                target: 1
            }]
        );
    }

    #[test]
    fn measure_rejected() {
        let err = parse_qasm(&format!(
            "{HEADER}qreg q[1];\ncreg c[1];\nh q[0];\nmeasure q[0] -> c[0];\n"
        ))
        .unwrap_err();
        assert!(err.message.contains("mid-circuit measurement unsupported"));
        assert_eq!((err.line, err.column), (6, 1));
    }

    #[test]
    fn unsupported_gate_names_gate_and_line() {
        let err = parse_qasm(&format!("{HEADER}qreg q[1];\nu3(0,0,0) q[0];\n")).unwrap_err();
        assert!(err.message.contains("u3"));
        assert_eq!(err.line, 4);
    }

    #[test]
    fn malformed_syntax_is_positioned() {
        let err = parse_qasm("OPENQASM 2.0;\nqreg q[2];\ncx q[0] q[1];\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 9));
        let err = parse_qasm("qreg q[1];\nh q[3];\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn expressions_and_broadcast() {
        let c = parse_qasm(
            "qreg a[1];\nqreg b[2];\nbarrier a,b;\nh b;\nrz(-(pi - 1)*2/4 + 1e-1) a[0];\n",
        )
        .unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.gates().len(), 3);
        assert_eq!(
            c.gates()[0],
            Gate::Clifford1Q {
                kind: Clifford1Q::H,
                qubit: 1
            }
        );
        assert_eq!(
            c.gates()[2],
            Gate::Rz {
                angle: -(PI - 1.0) * 2.0 / 4.0 + 0.1,
                qubit: 0
            }
        );
    }

    #[test]
    fn pauli_rotation_extension() {
        let c = parse_qasm("qreg q[3];\nrzx(0.5) q[2],q[0];\nrx(0.25) q[1];\n").unwrap();
        assert_eq!(
            c.gates()[0],
            Gate::PauliRotation {
                axis: "XIZ".parse().unwrap(),
                angle: 0.5
            }
        );
        assert_eq!(
            c.gates()[1],
            Gate::PauliRotation {
                axis: "IXI".parse().unwrap(),
                angle: 0.25
            }
        );
    }

    #[test]
    fn emit_round_trip() {
        let mut c = Circuit::new(3);
        c.h(0).unwrap().rz(0.1 + 0.2, 1).unwrap().cz(2, 0).unwrap();
        c.rotation(&[(0, Pauli::Y), (2, Pauli::X)], -1e-20).unwrap();
        c.rz(7.0 * PI / 2.0, 2).unwrap();
        let text = emit_qasm(&c);
        assert_eq!(parse_qasm(&text).unwrap(), c);
    }
}
