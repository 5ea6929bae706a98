//! Generators for benchmark circuits, coupling maps and observables.

use std::f64::consts::PI;

use rand::Rng;

use super::{Circuit, CircuitError, Clifford1Q, Gate};
use crate::observable::{Observable, PauliTerm};
use crate::pauli::{Pauli, PauliString};

/// Undirected coupling edges as `(u, v)` pairs.
pub type Couplings = Vec<(usize, usize)>;

/// The 19-qubit distance-3 heavy-hex lattice, sorted undirected edges.
pub fn heavy_hex_19() -> Couplings {
    vec![
        (0, 9),
        (0, 13),
        (1, 13),
        (1, 14),
        (2, 14),
        (3, 9),
        (3, 15),
        (4, 15),
        (4, 16),
        (5, 12),
        (5, 16),
        (6, 17),
        (7, 17),
        (7, 18),
        (8, 12),
        (8, 18),
        (10, 14),
        (10, 16),
        (11, 15),
        (11, 17),
    ]
}

/// Parse an edge list with one `u v` pair per line. `#` starts a comment.
pub fn coupling_map_from_text(text: &str) -> Result<Couplings, CircuitError> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CircuitError::CouplingParse {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err("expected `u v`".into()));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("invalid qubit index `{s}`")))
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(err(format!("self-loop on qubit {u}")));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn check_edges(n: usize, edges: &[(usize, usize)]) -> Result<(), CircuitError> {
    for &(u, v) in edges {
        if u >= n || v >= n || u == v {
            return Err(CircuitError::InvalidEdge(u, v));
        }
    }
    Ok(())
}

/// Hardware-efficient ansatz with `sx`/`rz` rotation blocks and a linear CZ
/// ladder, laid out gate for gate as a transpiled EfficientSU2 circuit.
///
/// Takes `2·n·(reps+1)` angles; block `r` uses `params[2nr..2nr+n]` for the
/// first and `params[2nr+n..2n(r+1)]` for the second rotation on each qubit.
pub fn efficient_su2(n: usize, reps: usize, params: &[f64]) -> Result<Circuit, CircuitError> {
    let expected = 2 * n * (reps + 1);
    if params.len() != expected {
        return Err(CircuitError::ParameterCount {
            expected,
            got: params.len(),
        });
    }
    if n == 0 {
        return Err(CircuitError::Invalid(
            "ansatz needs at least one qubit".into(),
        ));
    }
    let theta = |block: usize, k: usize| params[2 * n * block + k];
    let mut c = Circuit::new(n);

    for q in 0..n {
        let frame = if q == 0 { 3.0 * PI } else { 7.0 * PI / 2.0 };
        c.sx(q)?
            .rz(theta(0, q), q)?
            .sx(q)?
            .rz(frame, q)?
            .rz(theta(0, n + q), q)?;
    }
    for block in 1..=reps {
        for q in 1..n {
            let frame = if q == n - 1 { -PI / 2.0 } else { PI };
            c.sx(q)?.rz(frame, q)?;
        }
        for q in 0..n {
            if q + 1 < n {
                c.cz(q, q + 1)?;
                c.sx(q + 1)?.rz(PI / 2.0, q + 1)?;
                c.sx(q)?;
            }
            c.rz(theta(block, q), q)?
                .sx(q)?
                .rz(3.0 * PI, q)?
                .rz(theta(block, n + q), q)?;
        }
    }
    Ok(c)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct HeisenbergParams {
    pub j: [f64; 3],
    pub h: [f64; 3],
    pub time: f64,
    pub steps: usize,
}

impl HeisenbergParams {
    /// Couplings `J = (pi/8, pi/4, pi/2)`, fields `h = (pi/3, pi/6, pi/9)`,
    /// `t = 0.2`, one Lie-Trotter step.
    pub fn reference() -> Self {
        Self {
            j: [PI / 8.0, PI / 4.0, PI / 2.0],
            h: [PI / 3.0, PI / 6.0, PI / 9.0],
            time: 0.2,
            steps: 1,
        }
    }
}

/// First-order Lie-Trotter circuit for the XYZ Heisenberg model with a
/// uniform field. Each step applies `XX`, `YY`, `ZZ` rotations per edge in
/// input order, then `X`, `Y`, `Z` field rotations per qubit. Terms with a
/// zero coefficient are omitted.
pub fn heisenberg_trotter(
    n: usize,
    edges: &[(usize, usize)],
    p: &HeisenbergParams,
) -> Result<Circuit, CircuitError> {
    check_edges(n, edges)?;
    if p.steps == 0 {
        return Err(CircuitError::Invalid(
            "trotter steps must be at least 1".into(),
        ));
    }
    let dt = p.time / p.steps as f64;
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut c = Circuit::new(n);
    for _ in 0..p.steps {
        for &(u, v) in edges {
            for (k, &l) in letters.iter().enumerate() {
                if p.j[k] != 0.0 {
                    c.rotation(&[(u, l), (v, l)], 2.0 * p.j[k] * dt)?;
                }
            }
        }
        for q in 0..n {
            for (k, &l) in letters.iter().enumerate() {
                if p.h[k] != 0.0 {
                    c.rotation(&[(q, l)], 2.0 * p.h[k] * dt)?;
                }
            }
        }
    }
    Ok(c)
}

/// QAOA for MaxCut: Hadamards, then per layer a `CX·Rz(2γ)·CX` phase
/// separator on each edge and an `Rx(2β)` mixer on each qubit.
pub fn qaoa_maxcut(
    n: usize,
    edges: &[(usize, usize)],
    gammas: &[f64],
    betas: &[f64],
) -> Result<Circuit, CircuitError> {
    check_edges(n, edges)?;
    if gammas.len() != betas.len() {
        return Err(CircuitError::ParameterCount {
            expected: gammas.len(),
            got: betas.len(),
        });
    }
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.h(q)?;
    }
    for (&g, &b) in gammas.iter().zip(betas) {
        for &(u, v) in edges {
            c.cx(u, v)?.rz(2.0 * g, v)?.cx(u, v)?;
        }
        for q in 0..n {
            c.rotation(&[(q, Pauli::X)], 2.0 * b)?;
        }
    }
    Ok(c)
}

/// Shape of a random circuit: `depth` gates drawn independently.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RandomCircuitSpec {
    pub n: usize,
    pub depth: usize,
    /// Probability that a gate acts on two qubits (when `n >= 2`).
    pub two_qubit_prob: f64,
    /// Probability that a gate is a fixed Clifford rather than a rotation.
    pub clifford_prob: f64,
}

/// Random mix of single-qubit Cliffords, `Rz`, `CX`/`CZ` and one- or
/// two-qubit Pauli rotations with uniform angles in `(-pi, pi)`.
pub fn random_circuit<R: Rng + ?Sized>(spec: &RandomCircuitSpec, rng: &mut R) -> Circuit {
    let n = spec.n;
    let mut c = Circuit::new(n);
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    for _ in 0..spec.depth {
        let two = n >= 2 && rng.gen_bool(spec.two_qubit_prob);
        let clifford = rng.gen_bool(spec.clifford_prob);
        let gate = if two {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            if clifford {
                let kind = if rng.gen_bool(0.5) {
                    super::Clifford2Q::CX
                } else {
                    super::Clifford2Q::CZ
                };
                Gate::Clifford2Q {
                    kind,
                    control: a,
                    target: b,
                }
            } else {
                let axis = PauliString::from_sparse(
                    n,
                    &[
                        (a, letters[rng.gen_range(0..3)]),
                        (b, letters[rng.gen_range(0..3)]),
                    ],
                )
                .expect("qubits in range");
                Gate::PauliRotation {
                    axis,
                    angle: rng.gen_range(-PI..PI),
                }
            }
        } else {
            let q = rng.gen_range(0..n);
            if clifford {
                Gate::Clifford1Q {
                    kind: Clifford1Q::ALL[rng.gen_range(0..Clifford1Q::ALL.len())],
                    qubit: q,
                }
            } else if rng.gen_bool(0.5) {
                Gate::Rz {
                    angle: rng.gen_range(-PI..PI),
                    qubit: q,
                }
            } else {
                let axis = PauliString::single(n, q, letters[rng.gen_range(0..3)])
                    .expect("qubit in range");
                Gate::PauliRotation {
                    axis,
                    angle: rng.gen_range(-PI..PI),
                }
            }
        };
        c.push(gate).expect("generated gate is valid");
    }
    c
}

/// Coefficient convention for [`weight_observable`].
#[derive(Copy, Clone, Debug, PartialEq, Default)]
pub enum WeightNormalization {
    /// Each term gets `1 / number_of_terms`.
    #[default]
    PerTerm,
    /// Each term gets the given coefficient.
    Fixed(f64),
}

/// Sum of all `n - b + 1` contiguous all-`Z` words of weight `b`.
pub fn weight_observable(
    n: usize,
    b: usize,
    norm: WeightNormalization,
) -> Result<Observable, CircuitError> {
    if b == 0 || b > n {
        return Err(CircuitError::WeightOutOfRange { b, n });
    }
    let count = n - b + 1;
    let coeff = match norm {
        WeightNormalization::PerTerm => 1.0 / count as f64,
        WeightNormalization::Fixed(c) => c,
    };
    let terms = (0..count)
        .map(|start| {
            let letters: Vec<(usize, Pauli)> = (start..start + b).map(|q| (q, Pauli::Z)).collect();
            PauliTerm::new(
                coeff,
                PauliString::from_sparse(n, &letters).expect("in range"),
            )
        })
        .collect();
    Ok(Observable::new(n, terms).expect("uniform width"))
}

/// `(1/|qubits|) Σ Z_q` over the listed qubits of an `n`-qubit register.
pub fn z_average(n: usize, qubits: &[usize]) -> Result<Observable, CircuitError> {
    if qubits.is_empty() {
        return Err(CircuitError::Invalid("average over no qubits".into()));
    }
    let coeff = 1.0 / qubits.len() as f64;
    let mut terms = Vec::with_capacity(qubits.len());
    for &q in qubits {
        if q >= n {
            return Err(CircuitError::QubitOutOfRange { qubit: q, n });
        }
        terms.push(PauliTerm::new(
            coeff,
            PauliString::single(n, q, Pauli::Z).expect("checked"),
        ));
    }
    Ok(Observable::new(n, terms).expect("uniform width"))
}
