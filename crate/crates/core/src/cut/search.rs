//! Cut search by recursive bisection.
//!
//! A bisection gives every wire one of: stay on a side, or start on one side
//! and move to the other through a single wire cut placed between two of its
//! two-qubit gates. Small instances are solved exactly by branch and bound.
//! Up to [`ENUMERATION_LIMIT`] wires every bipartition of the wires is
//! enumerated and each is improved by per-wire coordinate descent over the
//! wire-cut options. Wider instances anneal over the bipartitions.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CutConstraint, CutCount, CutError, CutOptions, CutPlan, WireCut};
use crate::circuit::Circuit;
use crate::util::derive_seed;

/// Widest instance solved by enumerating all bipartitions.
pub const ENUMERATION_LIMIT: usize = 14;
/// Largest branch-and-bound search space, in option-vector count.
const EXACT_LIMIT: f64 = (1u64 << 20) as f64;
const ANNEAL_RESTARTS: u64 = 10;
const ANNEAL_STEPS: usize = 600;
const DESCENT_ROUNDS: usize = 8;

/// A contiguous stretch `[start, end)` of a qubit's timeline.
#[derive(Clone, Debug)]
struct Wire {
    qubit: usize,
    start: usize,
    end: usize,
    /// Indices into `Instance::events`, in time order.
    events: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    gate: usize,
    a: usize,
    b: usize,
}

#[derive(Clone, Debug)]
struct Instance {
    wires: Vec<Wire>,
    events: Vec<Event>,
}

impl Instance {
    fn from_circuit(circuit: &Circuit) -> Result<Self, CutError> {
        let n = circuit.num_qubits();
        let mut wires: Vec<Wire> = (0..n)
            .map(|q| Wire {
                qubit: q,
                start: 0,
                end: circuit.len(),
                events: Vec::new(),
            })
            .collect();
        let mut events = Vec::new();
        for (i, g) in circuit.gates().iter().enumerate() {
            match g.arity() {
                1 => {}
                2 => {
                    let qs = g.qubits();
                    wires[qs[0]].events.push(events.len());
                    wires[qs[1]].events.push(events.len());
                    events.push(Event {
                        gate: i,
                        a: qs[0],
                        b: qs[1],
                    });
                }
                arity => return Err(CutError::UnsupportedGate { index: i, arity }),
            }
        }
        Ok(Instance { wires, events })
    }

    fn width(&self) -> usize {
        self.wires.len()
    }

    fn option_space(&self) -> f64 {
        self.wires
            .iter()
            .map(|w| (2 * w.events.len().max(1)) as f64)
            .product::<f64>()
            / 2.0
    }
}

/// How one wire is placed by a bisection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Choice {
    first: u8,
    last: u8,
    /// For a moving wire, the index (into the wire's events) of the first
    /// event on the second side; zero for a wire that stays.
    at: u16,
}

impl Choice {
    fn stay(side: u8) -> Self {
        Choice {
            first: side,
            last: side,
            at: 0,
        }
    }

    fn side_at(&self, k: usize) -> u8 {
        if self.first == self.last || k < self.at as usize {
            self.first
        } else {
            self.last
        }
    }

    fn moves(&self) -> bool {
        self.first != self.last
    }
}

fn wire_options(m: usize) -> Vec<Choice> {
    let mut out = vec![Choice::stay(0)];
    for (first, last) in [(0u8, 1u8), (1, 0)] {
        for at in 1..m {
            out.push(Choice {
                first,
                last,
                at: at as u16,
            });
        }
    }
    out.push(Choice::stay(1));
    out.sort();
    out
}

/// Position of each event within its two wires' event lists.
fn event_rank(inst: &Instance) -> Vec<[usize; 2]> {
    let mut rank = vec![[0usize; 2]; inst.events.len()];
    for (v, w) in inst.wires.iter().enumerate() {
        for (k, &e) in w.events.iter().enumerate() {
            rank[e][usize::from(inst.events[e].a != v)] = k;
        }
    }
    rank
}

struct Caps {
    cap: [usize; 2],
}

impl Caps {
    fn symmetric(&self) -> bool {
        self.cap[0] == self.cap[1]
    }

    fn feasible(&self, count: [usize; 2]) -> bool {
        count[0] <= self.cap[0] && count[1] <= self.cap[1]
    }
}

fn side_counts(choices: &[Choice]) -> [usize; 2] {
    let mut c = [0, 0];
    for ch in choices {
        c[ch.first as usize] += 1;
        if ch.moves() {
            c[ch.last as usize] += 1;
        }
    }
    c
}

fn evaluate(inst: &Instance, rank: &[[usize; 2]], choices: &[Choice]) -> CutCount {
    let kg = inst
        .events
        .iter()
        .enumerate()
        .filter(|(e, ev)| choices[ev.a].side_at(rank[*e][0]) != choices[ev.b].side_at(rank[*e][1]))
        .count();
    CutCount {
        kg,
        kw: choices.iter().filter(|c| c.moves()).count(),
    }
}

type Solution = (CutCount, Vec<Choice>);

fn better(a: &Solution, b: &Solution) -> bool {
    (a.0, &a.1) < (b.0, &b.1)
}

/// Exhaustive branch and bound. Under symmetric capacities wire 0 starts on
/// side 0, which loses nothing.
fn exact(inst: &Instance, rank: &[[usize; 2]], caps: &Caps) -> Option<Solution> {
    let w = inst.width();
    // events whose later-numbered endpoint is wire v
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); w];
    for (e, ev) in inst.events.iter().enumerate() {
        closing[ev.a.max(ev.b)].push(e);
    }
    let options: Vec<Vec<Choice>> = inst
        .wires
        .iter()
        .map(|wire| wire_options(wire.events.len()))
        .collect();
    let mut best: Option<Solution> = None;
    let mut current = Vec::with_capacity(w);

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        v: usize,
        inst: &Instance,
        rank: &[[usize; 2]],
        caps: &Caps,
        closing: &[Vec<usize>],
        options: &[Vec<Choice>],
        current: &mut Vec<Choice>,
        cost: CutCount,
        count: [usize; 2],
        best: &mut Option<Solution>,
    ) {
        if v == inst.width() {
            if count[0] > 0 && count[1] > 0 && best.as_ref().is_none_or(|b| cost < b.0) {
                *best = Some((cost, current.clone()));
            }
            return;
        }
        for &ch in &options[v] {
            if v == 0 && ch.first != 0 && caps.symmetric() {
                continue;
            }
            let mut count = count;
            count[ch.first as usize] += 1;
            if ch.moves() {
                count[ch.last as usize] += 1;
            }
            if !caps.feasible(count) {
                continue;
            }
            current.push(ch);
            let mut c = cost;
            c.kw += usize::from(ch.moves());
            for &e in &closing[v] {
                let ev = inst.events[e];
                if current[ev.a].side_at(rank[e][0]) != current[ev.b].side_at(rank[e][1]) {
                    c.kg += 1;
                }
            }
            if best.as_ref().is_none_or(|b| c < b.0) {
                recurse(
                    v + 1,
                    inst,
                    rank,
                    caps,
                    closing,
                    options,
                    current,
                    c,
                    count,
                    best,
                );
            }
            current.pop();
        }
    }

    recurse(
        0,
        inst,
        rank,
        caps,
        &closing,
        &options,
        &mut current,
        CutCount::default(),
        [0, 0],
        &mut best,
    );
    best
}

/// Coordinate descent from every wire staying on its home side. Each wire in
/// turn takes its best option among staying home and moving once in either
/// direction, with all other wires fixed.
fn descend(inst: &Instance, rank: &[[usize; 2]], caps: &Caps, home: &[u8]) -> Option<Solution> {
    let mut choices: Vec<Choice> = home.iter().map(|&s| Choice::stay(s)).collect();
    let mut count = side_counts(&choices);
    if !caps.feasible(count) || count[0] == 0 || count[1] == 0 {
        return None;
    }
    let local = |choices: &[Choice], v: usize, ch: Choice| -> CutCount {
        let mut kg = 0;
        for &e in &inst.wires[v].events {
            let ev = inst.events[e];
            let (sa, sb) = if ev.a == v {
                (ch.side_at(rank[e][0]), choices[ev.b].side_at(rank[e][1]))
            } else {
                (choices[ev.a].side_at(rank[e][0]), ch.side_at(rank[e][1]))
            };
            kg += usize::from(sa != sb);
        }
        CutCount {
            kg,
            kw: usize::from(ch.moves()),
        }
    };
    for _ in 0..DESCENT_ROUNDS {
        let mut changed = false;
        for v in 0..inst.width() {
            let h = home[v];
            let cur = choices[v];
            let mut best = (local(&choices, v, cur), cur);
            for ch in wire_options(inst.wires[v].events.len()) {
                if ch == cur
                    || (!ch.moves() && ch.first != h)
                    || (ch.moves() && ch.first != h && ch.last != h)
                {
                    continue;
                }
                let mut c = count;
                c[cur.first as usize] -= 1;
                if cur.moves() {
                    c[cur.last as usize] -= 1;
                }
                c[ch.first as usize] += 1;
                if ch.moves() {
                    c[ch.last as usize] += 1;
                }
                if !caps.feasible(c) || c[0] == 0 || c[1] == 0 {
                    continue;
                }
                let cand = (local(&choices, v, ch), ch);
                if cand < best {
                    best = cand;
                }
            }
            if best.1 != cur {
                let ch = best.1;
                count[cur.first as usize] -= 1;
                if cur.moves() {
                    count[cur.last as usize] -= 1;
                }
                count[ch.first as usize] += 1;
                if ch.moves() {
                    count[ch.last as usize] += 1;
                }
                choices[v] = ch;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Some((evaluate(inst, rank, &choices), choices))
}

fn enumerate(inst: &Instance, rank: &[[usize; 2]], caps: &Caps) -> Option<Solution> {
    let w = inst.width();
    let masks: Vec<u64> = if caps.symmetric() {
        (0..1u64 << (w - 1)).map(|m| m << 1).collect()
    } else {
        (0..1u64 << w).collect()
    };
    masks
        .par_iter()
        .filter_map(|&mask| {
            let home: Vec<u8> = (0..w).map(|v| ((mask >> v) & 1) as u8).collect();
            descend(inst, rank, caps, &home)
        })
        .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)))
}

fn anneal(inst: &Instance, rank: &[[usize; 2]], caps: &Caps, seed: u64) -> Option<Solution> {
    let w = inst.width();
    (0..ANNEAL_RESTARTS)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r));
            let mut cache: HashMap<Vec<u8>, Option<Solution>> = HashMap::new();
            let mut eval = |home: &Vec<u8>| -> Option<Solution> {
                cache
                    .entry(home.clone())
                    .or_insert_with(|| descend(inst, rank, caps, home))
                    .clone()
            };
            // random start filling side 0 to capacity
            let mut order: Vec<usize> = (0..w).collect();
            for i in (1..w).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            let mut home = vec![0u8; w];
            let ones = w.saturating_sub(caps.cap[0]).max(1).min(caps.cap[1]);
            for &v in &order[..ones] {
                home[v] = 1;
            }
            let mut cur = eval(&home)?;
            let mut best = cur.clone();
            let (t0, t1) = (2.0f64, 0.02f64);
            for step in 0..ANNEAL_STEPS {
                let t = t0 * (t1 / t0).powf(step as f64 / ANNEAL_STEPS as f64);
                let mut next = home.clone();
                if rng.gen_bool(0.5) {
                    let v = rng.gen_range(0..w);
                    next[v] ^= 1;
                } else {
                    let zeros: Vec<usize> = (0..w).filter(|&v| next[v] == 0).collect();
                    let ones: Vec<usize> = (0..w).filter(|&v| next[v] == 1).collect();
                    if zeros.is_empty() || ones.is_empty() {
                        continue;
                    }
                    let (a, b) = (
                        zeros[rng.gen_range(0..zeros.len())],
                        ones[rng.gen_range(0..ones.len())],
                    );
                    next.swap(a, b);
                }
                let Some(cand) = eval(&next) else { continue };
                let delta = cand.0.log_overhead() - cur.0.log_overhead();
                if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
                    home = next;
                    cur = cand;
                    if better(&cur, &best) {
                        best = cur.clone();
                    }
                }
            }
            Some(if caps.symmetric() {
                normalize(best)
            } else {
                best
            })
        })
        .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)))
}

/// Swap sides so that wire 0 starts on side 0.
fn normalize(sol: Solution) -> Solution {
    if sol.1.first().is_some_and(|c| c.first == 1) {
        let flipped = sol
            .1
            .iter()
            .map(|c| Choice {
                first: 1 - c.first,
                last: 1 - c.last,
                at: c.at,
            })
            .collect();
        (sol.0, flipped)
    } else {
        sol
    }
}

fn bisect(inst: &Instance, caps: &Caps, seed: u64) -> Option<Solution> {
    let rank = event_rank(inst);
    if inst.option_space() <= EXACT_LIMIT {
        exact(inst, &rank, caps)
    } else if inst.width() <= ENUMERATION_LIMIT {
        enumerate(inst, &rank, caps)
    } else {
        anneal(inst, &rank, caps, seed)
    }
}

/// Split `inst` by `choices` into the two side instances, recording wire cuts.
fn split(inst: &Instance, choices: &[Choice], cuts: &mut Vec<WireCut>) -> [Instance; 2] {
    let rank = event_rank(inst);
    let mut sides: [Vec<Wire>; 2] = [Vec::new(), Vec::new()];
    // new wire index of (old wire, side)
    let mut index: Vec<[Option<usize>; 2]> = vec![[None, None]; inst.width()];
    for (v, wire) in inst.wires.iter().enumerate() {
        let ch = choices[v];
        if ch.moves() {
            let pos = inst.events[wire.events[ch.at as usize]].gate;
            cuts.push(WireCut {
                qubit: wire.qubit,
                position: pos,
            });
            for (side, start, end) in [(ch.first, wire.start, pos), (ch.last, pos, wire.end)] {
                index[v][side as usize] = Some(sides[side as usize].len());
                sides[side as usize].push(Wire {
                    qubit: wire.qubit,
                    start,
                    end,
                    events: Vec::new(),
                });
            }
        } else {
            index[v][ch.first as usize] = Some(sides[ch.first as usize].len());
            sides[ch.first as usize].push(Wire {
                qubit: wire.qubit,
                start: wire.start,
                end: wire.end,
                events: Vec::new(),
            });
        }
    }
    let mut events: [Vec<Event>; 2] = [Vec::new(), Vec::new()];
    for (e, ev) in inst.events.iter().enumerate() {
        let (sa, sb) = (
            choices[ev.a].side_at(rank[e][0]),
            choices[ev.b].side_at(rank[e][1]),
        );
        if sa != sb {
            continue;
        }
        let s = sa as usize;
        let (a, b) = (index[ev.a][s].unwrap(), index[ev.b][s].unwrap());
        let idx = events[s].len();
        sides[s][a].events.push(idx);
        sides[s][b].events.push(idx);
        events[s].push(Event {
            gate: ev.gate,
            a,
            b,
        });
    }
    let [w0, w1] = sides;
    let [e0, e1] = events;
    [
        Instance {
            wires: w0,
            events: e0,
        },
        Instance {
            wires: w1,
            events: e1,
        },
    ]
}

/// Find a cut plan minimizing `9^kg · 16^kw` under `options.constraint`.
///
/// `MaxQubits(m)` bisects recursively. An instance of `w > m` wires needs at
/// least `k = ceil(w/m)` subcircuits; it is split into sides of at most
/// `m·ceil(k/2)` and `m·floor(k/2)` wires, and each side is split again while
/// it is wider than `m`. `Bipartition` splits once. The
/// result depends only on the circuit, the constraint and the seed.
pub fn find_cuts(circuit: &Circuit, options: &CutOptions) -> Result<CutPlan, CutError> {
    let root = Instance::from_circuit(circuit)?;
    let n = circuit.num_qubits();
    let mut cuts = Vec::new();
    let mut leaves: Vec<Instance> = Vec::new();
    match options.constraint {
        CutConstraint::MaxQubits(0) => {
            return Err(CutError::Unsatisfiable(
                "subcircuits need at least one qubit".into(),
            ))
        }
        CutConstraint::MaxQubits(m) => {
            let mut stack = vec![(root, 0u64)];
            let mut counter = 0u64;
            while let Some((inst, path)) = stack.pop() {
                let w = inst.width();
                if w <= m {
                    leaves.push(inst);
                    continue;
                }
                let k = w.div_ceil(m);
                let cap = [m * k.div_ceil(2), m * (k / 2)];
                let sol = bisect(&inst, &Caps { cap }, derive_seed(options.seed, path))
                    .ok_or_else(|| {
                        CutError::Unsatisfiable(format!(
                            "cannot split {w} wires into sides of {cap:?}"
                        ))
                    })?;
                let [a, b] = split(&inst, &sol.1, &mut cuts);
                counter += 2;
                stack.push((b, counter));
                stack.push((a, counter - 1));
            }
        }
        CutConstraint::Bipartition => {
            if n < 2 {
                return Err(CutError::Unsatisfiable(
                    "a bipartition needs at least two qubits".into(),
                ));
            }
            let sol = bisect(&root, &Caps { cap: [n, n] }, options.seed)
                .ok_or_else(|| CutError::Unsatisfiable("no bipartition found".into()))?;
            let [a, b] = split(&root, &sol.1, &mut cuts);
            leaves.push(a);
            leaves.push(b);
        }
    }
    cuts.sort();
    let mut partition: Vec<Vec<usize>> = (0..n)
        .map(|q| vec![0; cuts.iter().filter(|c| c.qubit == q).count() + 1])
        .collect();
    for (label, leaf) in leaves.iter().enumerate() {
        for wire in &leaf.wires {
            let seg = cuts
                .iter()
                .filter(|c| c.qubit == wire.qubit && c.position <= wire.start)
                .count();
            partition[wire.qubit][seg] = label;
        }
    }
    let plan = CutPlan::assemble(circuit, cuts, partition);
    debug_assert!(plan.validate(circuit).is_ok());
    Ok(plan)
}
