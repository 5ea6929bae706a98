//! Recombining subcircuit expectations into the uncut value.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decomp::{apply_local, gate_cut_terms, wire_cut_terms, GateCutTerm, WireCutTerm};
use super::statevector::{ProductState, StateVector, DEFAULT_QUBIT_LIMIT, IMAG_TOLERANCE};
use super::QpdError;
use crate::circuit::Circuit;
use crate::cut::{extract_subcircuits, CutPlan, SubOp, Subcircuit};
use crate::observable::Observable;
use crate::pauli::PauliString;
use crate::util::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub value: f64,
    /// Joint choices of one term per cut, `Π` of the decomposition sizes.
    pub combinations: u128,
    /// Subcircuit instances actually simulated.
    pub simulations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructOptions {
    /// Widest subcircuit the simulator may run.
    pub limit: usize,
    /// Initial single-qubit state of every original qubit; `|0>` when absent.
    pub initial: Option<Vec<[C64; 2]>>,
    /// Replace every exact subexperiment expectation by a binomial estimate
    /// from this many shots. For demonstration only.
    pub shots: Option<u64>,
    pub seed: u64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            limit: DEFAULT_QUBIT_LIMIT,
            initial: None,
            shots: None,
            seed: 0,
        }
    }
}

struct Tables {
    gate: Vec<Vec<GateCutTerm>>,
    wire: Vec<WireCutTerm>,
    kg: usize,
}

impl Tables {
    fn radix(&self, cut: usize) -> usize {
        if cut < self.kg {
            self.gate[cut].len()
        } else {
            self.wire.len()
        }
    }
}

/// Global cut indices touching `sub`: gate cuts first, then wire cuts offset by `kg`.
fn incident_cuts(sub: &Subcircuit, kg: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = sub
        .ops
        .iter()
        .filter_map(|op| match op {
            SubOp::GateCutHalf { cut, .. } => Some(*cut),
            SubOp::Gate(_) => None,
        })
        .chain(
            sub.wires
                .iter()
                .flat_map(|w| [w.prepared_by, w.measured_by])
                .flatten()
                .map(|w| kg + w),
        )
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    cuts
}

/// Per-term expectations of one subcircuit for one choice of terms on its cuts.
fn evaluate(
    sub: &Subcircuit,
    tables: &Tables,
    choice: &HashMap<usize, usize>,
    opts: &ReconstructOptions,
) -> Result<Vec<C64>, QpdError> {
    let kg = tables.kg;
    let states: Vec<[C64; 2]> = sub
        .wires
        .iter()
        .map(|w| match (w.prepared_by, &opts.initial) {
            (Some(c), _) => tables.wire[choice[&(kg + c)]].prepare.amplitudes(),
            (None, Some(init)) => init[w.qubit],
            (None, None) => ProductState::Zero.amplitudes(),
        })
        .collect();
    let mut branches = vec![(1.0, StateVector::product_of(&states, opts.limit)?)];
    for op in &sub.ops {
        match op {
            SubOp::Gate(g) => branches.iter_mut().for_each(|(_, psi)| psi.apply_gate(g)),
            SubOp::GateCutHalf { cut, wire, first } => {
                let term = &tables.gate[*cut][choice[cut]];
                let ops = if *first { &term.first } else { &term.second };
                for local in ops {
                    apply_local(&mut branches, *wire, local);
                }
            }
        }
    }
    let mut extra = Vec::new();
    for (i, w) in sub.wires.iter().enumerate() {
        if let Some(c) = w.measured_by {
            extra.push((i, tables.wire[choice[&(kg + c)]].measure));
        }
    }
    let mut memo: HashMap<PauliString, C64> = HashMap::new();
    let mut out = Vec::with_capacity(sub.observable.words.len());
    for word in &sub.observable.words {
        let mut w = word.clone();
        for &(i, l) in &extra {
            w.set(i, l).expect("wire in range");
        }
        let v = *memo.entry(w).or_insert_with_key(|w| {
            branches
                .iter()
                .map(|(s, psi)| psi.pauli_expectation(w) * *s)
                .sum()
        });
        out.push(v);
    }
    Ok(out)
}

fn decode(mut index: usize, cuts: &[usize], tables: &Tables) -> HashMap<usize, usize> {
    let mut choice = HashMap::new();
    for &c in cuts.iter().rev() {
        let r = tables.radix(c);
        choice.insert(c, index % r);
        index /= r;
    }
    choice
}

/// Binomial estimate of a `±1`-valued expectation.
fn sample(value: C64, shots: u64, rng: &mut ChaCha8Rng) -> C64 {
    let p = ((1.0 + value.re) / 2.0).clamp(0.0, 1.0);
    let k = Binomial::new(shots, p)
        .expect("probability in range")
        .sample(rng);
    C64::new(2.0 * k as f64 / shots as f64 - 1.0, 0.0)
}

/// Expectation of `obs` after `circuit` from `|0...0>`, computed only from
/// the subcircuits of `plan` and the cut decompositions.
pub fn reconstruct(
    circuit: &Circuit,
    plan: &CutPlan,
    obs: &Observable,
    limit: usize,
) -> Result<Reconstruction, QpdError> {
    reconstruct_with(
        circuit,
        plan,
        obs,
        &ReconstructOptions {
            limit,
            ..ReconstructOptions::default()
        },
    )
}

/// [`reconstruct`] with an initial product state and optional sampling.
pub fn reconstruct_with(
    circuit: &Circuit,
    plan: &CutPlan,
    obs: &Observable,
    opts: &ReconstructOptions,
) -> Result<Reconstruction, QpdError> {
    if let Some(init) = &opts.initial {
        if init.len() != circuit.num_qubits() {
            return Err(QpdError::SizeMismatch {
                state: init.len(),
                obs: circuit.num_qubits(),
            });
        }
    }
    let limit = opts.limit;
    let subs = extract_subcircuits(circuit, plan, obs)?;
    let gate = plan
        .gate_cuts
        .iter()
        .map(|&g| gate_cut_terms(&circuit.gates()[g]))
        .collect::<Result<Vec<_>, _>>()?;
    let tables = Tables {
        gate,
        wire: wire_cut_terms(),
        kg: plan.gate_cuts.len(),
    };
    let total_cuts = tables.kg + plan.wire_cuts.len();
    let radices: Vec<usize> = (0..total_cuts).map(|c| tables.radix(c)).collect();
    let combinations = radices
        .iter()
        .fold(1u128, |acc, &r| acc.saturating_mul(r as u128));

    let mut incident = Vec::with_capacity(subs.len());
    let mut results: Vec<Vec<Vec<C64>>> = Vec::with_capacity(subs.len());
    let mut simulations = 0;
    for (index, sub) in subs.iter().enumerate() {
        if sub.width() > limit {
            return Err(QpdError::TooManyQubits {
                n: sub.width(),
                limit,
            });
        }
        let cuts = incident_cuts(sub, tables.kg);
        let count: usize = cuts.iter().map(|&c| tables.radix(c)).product();
        let mut table = (0..count)
            .into_par_iter()
            .map(|i| evaluate(sub, &tables, &decode(i, &cuts, &tables), opts))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(shots) = opts.shots.filter(|&s| s > 0) {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, index as u64));
            table
                .iter_mut()
                .flatten()
                .for_each(|v| *v = sample(*v, shots, &mut rng));
        }
        simulations += count;
        incident.push(cuts);
        results.push(table);
    }

    let coeffs: Vec<C64> = obs.terms().iter().map(|t| t.coeff).collect();
    let total =
        usize::try_from(combinations).map_err(|_| QpdError::TooManyCombinations(combinations))?;
    let mut value = C64::new(0.0, 0.0);
    let mut digits = vec![0usize; total_cuts];
    for step in 0..total {
        if step > 0 {
            // increment the mixed-radix counter, last cut fastest
            let mut k = total_cuts;
            while k > 0 {
                k -= 1;
                digits[k] += 1;
                if digits[k] < radices[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        let mut weight = 1.0;
        for (c, &d) in digits.iter().enumerate() {
            weight *= if c < tables.kg {
                tables.gate[c][d].coeff
            } else {
                tables.wire[d].coeff
            };
        }
        let local: Vec<&Vec<C64>> = incident
            .iter()
            .zip(&results)
            .map(|(cuts, table)| {
                let idx = cuts.iter().fold(0, |acc, &c| acc * radices[c] + digits[c]);
                &table[idx]
            })
            .collect();
        let inner: C64 = coeffs
            .iter()
            .enumerate()
            .map(|(t, c)| local.iter().fold(*c, |acc, e| acc * e[t]))
            .sum();
        value += inner * weight;
    }
    if value.im.abs() > IMAG_TOLERANCE {
        return Err(QpdError::ImaginaryExpectation(value.im));
    }
    Ok(Reconstruction {
        value: value.re,
        combinations,
        simulations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::z_average;
    use crate::cut::{find_cuts, CutOptions, WireCut};
    use crate::observable::PauliTerm;
    use crate::qpd::exact_expectation;

    fn layered(n: usize) -> Circuit {
        let mut c = Circuit::new(n);
        for q in 0..n {
            c.h(q)
                .unwrap()
                .rz(0.3 + 0.17 * q as f64, q)
                .unwrap()
                .sx(q)
                .unwrap();
        }
        for q in 0..n - 1 {
            c.cx(q, q + 1).unwrap();
        }
        for q in 0..n {
            c.rz(0.5 - 0.11 * q as f64, q).unwrap().h(q).unwrap();
        }
        for q in (0..n - 1).rev() {
            c.cz(q, q + 1).unwrap();
        }
        c
    }

    fn mixed_obs(n: usize) -> Observable {
        let mut terms = vec![];
        for q in 0..n {
            let mut w = PauliString::identity(n);
            w.set(q, crate::Pauli::Z).unwrap();
            terms.push(PauliTerm::new(0.3 + q as f64 * 0.1, w));
        }
        let xx = (0..n)
            .map(|q| {
                if q < 2 {
                    crate::Pauli::X
                } else {
                    crate::Pauli::Y
                }
            })
            .collect::<Vec<_>>();
        terms.push(PauliTerm::new(-0.7, PauliString::from_letters(&xx)));
        Observable::new(n, terms).unwrap()
    }

    #[test]
    fn uncut_plan_reproduces_exact_value() {
        let c = layered(4);
        let obs = mixed_obs(4);
        let r = reconstruct(&c, &CutPlan::uncut(&c), &obs, 20).unwrap();
        assert!((r.value - exact_expectation(&c, &obs, 20).unwrap()).abs() < 1e-12);
        assert_eq!(r.combinations, 1);
    }

    #[test]
    fn gate_cuts_reproduce_exact_value() {
        let c = layered(4);
        let obs = mixed_obs(4);
        let plan = find_cuts(&c, &CutOptions::max_qubits(2)).unwrap();
        assert!(plan.widths().iter().all(|&w| w <= 2));
        let r = reconstruct(&c, &plan, &obs, 20).unwrap();
        assert!((r.value - exact_expectation(&c, &obs, 20).unwrap()).abs() < 1e-10);
        let (kg, kw) = (plan.gate_cuts.len() as u32, plan.wire_cuts.len() as u32);
        assert_eq!(r.combinations, 6u128.pow(kg) * 8u128.pow(kw));
    }

    #[test]
    fn wire_cut_reproduces_exact_value() {
        let mut c = Circuit::new(3);
        c.h(0)
            .unwrap()
            .h(1)
            .unwrap()
            .rz(0.4, 1)
            .unwrap()
            .cx(0, 1)
            .unwrap()
            .sx(1)
            .unwrap()
            .rz(1.2, 1)
            .unwrap();
        c.cx(1, 2).unwrap().rz(-0.6, 2).unwrap().h(2).unwrap();
        let plan = CutPlan::assemble(
            &c,
            vec![WireCut {
                qubit: 1,
                position: 6,
            }],
            vec![vec![0], vec![0, 1], vec![1]],
        );
        plan.validate(&c).unwrap();
        for obs in [z_average(3, &[0, 1, 2]).unwrap(), mixed_obs(3)] {
            let r = reconstruct(&c, &plan, &obs, 20).unwrap();
            assert!((r.value - exact_expectation(&c, &obs, 20).unwrap()).abs() < 1e-12);
            assert_eq!(r.combinations, 8);
        }
    }

    #[test]
    fn rotation_gate_cut_reproduces_exact_value() {
        let mut c = Circuit::new(2);
        c.h(0).unwrap().rz(0.3, 1).unwrap().sx(1).unwrap();
        c.rotation(&[(0, crate::Pauli::Y), (1, crate::Pauli::X)], 0.77)
            .unwrap();
        c.rotation(&[(0, crate::Pauli::Z), (1, crate::Pauli::Z)], -0.4)
            .unwrap();
        let plan = find_cuts(&c, &CutOptions::bipartition()).unwrap();
        let obs = mixed_obs(2);
        let r = reconstruct(&c, &plan, &obs, 20).unwrap();
        assert!((r.value - exact_expectation(&c, &obs, 20).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn random_product_input_through_one_cz_cut() {
        let mut c = Circuit::new(2);
        c.cz(0, 1).unwrap();
        let plan = find_cuts(&c, &CutOptions::bipartition()).unwrap();
        assert_eq!(plan.gate_cuts, vec![0]);
        let init = vec![
            [C64::new(0.3, 0.1), C64::new(-0.5, 0.8)],
            [C64::new(0.9, 0.0), C64::new(0.2, -0.4)],
        ];
        let obs = Observable::new(
            2,
            vec![
                PauliTerm::new(1.0, "XY".parse().unwrap()),
                PauliTerm::new(0.5, "ZZ".parse().unwrap()),
            ],
        )
        .unwrap();
        let opts = ReconstructOptions {
            initial: Some(init.clone()),
            ..ReconstructOptions::default()
        };
        let r = reconstruct_with(&c, &plan, &obs, &opts).unwrap();
        let psi =
            crate::qpd::simulate_from(&c, StateVector::product_of(&init, 20).unwrap()).unwrap();
        assert!((r.value - psi.expectation(&obs).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn sampling_is_seeded_and_close() {
        let c = layered(3);
        let obs = mixed_obs(3);
        let plan = find_cuts(&c, &CutOptions::max_qubits(2)).unwrap();
        let opts = ReconstructOptions {
            shots: Some(20_000),
            seed: 5,
            ..ReconstructOptions::default()
        };
        let a = reconstruct_with(&c, &plan, &obs, &opts).unwrap();
        let b = reconstruct_with(&c, &plan, &obs, &opts).unwrap();
        assert_eq!(a, b);
        let exact = exact_expectation(&c, &obs, 20).unwrap();
        assert!((a.value - exact).abs() < 0.5, "{} vs {exact}", a.value);
    }

    #[test]
    fn subcircuit_width_limit_applies() {
        let c = layered(4);
        let err = reconstruct(&c, &CutPlan::uncut(&c), &mixed_obs(4), 3).unwrap_err();
        assert!(matches!(err, QpdError::TooManyQubits { n: 4, limit: 3 }));
    }
}
