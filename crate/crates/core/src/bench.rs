//! Shipped benchmark suites comparing plain cutting with backpropagation
//! followed by cutting.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anneal::{optimize, AnnealError, CutObjective, Optimization, SaConfig};
use crate::circuit::{
    efficient_su2, heavy_hex_19, heisenberg_trotter, qaoa_maxcut, random_circuit, z_average,
    Circuit, CircuitError, HeisenbergParams, RandomCircuitSpec,
};
use crate::cut::CutOptions;
use crate::observable::Observable;
use crate::util::derive_seed;

/// Seed of the fixed ansatz angles used by the `vqe6` case.
pub const VQE6_PARAM_SEED: u64 = 6;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Vqe6,
    Heis19,
    Qaoa3,
    Random,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Vqe6, Suite::Heis19, Suite::Qaoa3, Suite::Random];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Vqe6 => "vqe6",
            Suite::Heis19 => "heis19",
            Suite::Qaoa3 => "qaoa3",
            Suite::Random => "random",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// A circuit, its observable and the cut constraint it is benchmarked under.
#[derive(Clone, Debug)]
pub struct BenchCase {
    pub name: String,
    pub circuit: Circuit,
    pub obs: Observable,
    pub max_qubits: usize,
}

/// Six-qubit EfficientSU2 ansatz with fixed random angles, the mean of `Z`
/// over all qubits, and subcircuits of at most three qubits.
pub fn vqe6() -> Result<BenchCase, CircuitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(VQE6_PARAM_SEED);
    let params: Vec<f64> = (0..24)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    Ok(BenchCase {
        name: "vqe6".into(),
        circuit: efficient_su2(6, 1, &params)?,
        obs: z_average(6, &(0..6).collect::<Vec<_>>())?,
        max_qubits: 3,
    })
}

/// One Trotter step of the XYZ Heisenberg model on the 19-qubit heavy-hex
/// lattice, the mean of `Z` over qubits 0 to 5, and subcircuits of at most
/// ten qubits.
pub fn heis19() -> Result<BenchCase, CircuitError> {
    Ok(BenchCase {
        name: "heis19".into(),
        circuit: heisenberg_trotter(19, &heavy_hex_19(), &HeisenbergParams::reference())?,
        obs: z_average(19, &(0..6).collect::<Vec<_>>())?,
        max_qubits: 10,
    })
}

/// Depth-2 QAOA for MaxCut on a triangle, cut into pairs.
pub fn qaoa3() -> Result<BenchCase, CircuitError> {
    let edges = [(0, 1), (1, 2), (0, 2)];
    Ok(BenchCase {
        name: "qaoa3".into(),
        circuit: qaoa_maxcut(3, &edges, &[0.4, 0.8], &[0.7, 0.3])?,
        obs: z_average(3, &[0, 1, 2])?,
        max_qubits: 2,
    })
}

/// Random circuits of six to eight qubits derived from `seed`.
pub fn random_cases(seed: u64, count: usize) -> Result<Vec<BenchCase>, CircuitError> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let n = 6 + i % 3;
            let spec = RandomCircuitSpec {
                n,
                depth: 40,
                two_qubit_prob: 0.35,
                clifford_prob: 0.5,
            };
            Ok(BenchCase {
                name: format!("random{i}"),
                circuit: random_circuit(&spec, &mut rng),
                obs: z_average(n, &(0..n).collect::<Vec<_>>())?,
                max_qubits: n.div_ceil(2),
            })
        })
        .collect()
}

pub fn suite_cases(suite: Suite, seed: u64) -> Result<Vec<BenchCase>, CircuitError> {
    Ok(match suite {
        Suite::Vqe6 => vec![vqe6()?],
        Suite::Heis19 => vec![heis19()?],
        Suite::Qaoa3 => vec![qaoa3()?],
        Suite::Random => random_cases(seed, 4)?,
    })
}

/// One table row: plain cutting against the annealed budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub suite: Suite,
    pub circuit: String,
    pub qubits: usize,
    pub gates: usize,
    pub max_qubits: usize,
    pub vanilla_kg: usize,
    pub vanilla_kw: usize,
    pub vanilla_cost: u128,
    /// `None` when plain cutting was kept.
    pub w_opt: Option<u32>,
    pub obp_kg: usize,
    pub obp_kw: usize,
    pub obp_groups: usize,
    pub obp_cost: u128,
    pub ratio: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "suite,circuit,qubits,gates,max_qubits,vanilla_kg,vanilla_kw,vanilla_cost,w_opt,obp_kg,obp_kw,obp_groups,obp_cost,ratio";

    pub fn to_csv(&self) -> String {
        let w = self
            .w_opt
            .map_or_else(|| "vanilla".to_string(), |w| w.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            self.suite,
            self.circuit,
            self.qubits,
            self.gates,
            self.max_qubits,
            self.vanilla_kg,
            self.vanilla_kw,
            self.vanilla_cost,
            w,
            self.obp_kg,
            self.obp_kw,
            self.obp_groups,
            self.obp_cost,
            self.ratio
        )
    }
}

/// Optimize one case. The cut search seed and the annealing seed both come
/// from `config.seed`.
pub fn run_case(
    suite: Suite,
    case: &BenchCase,
    config: &SaConfig,
) -> Result<(BenchRow, Optimization), AnnealError> {
    let options = CutOptions {
        seed: derive_seed(config.seed, u64::MAX),
        ..CutOptions::max_qubits(case.max_qubits)
    };
    let objective = CutObjective::new(&case.circuit, &case.obs, options);
    let opt = optimize(&case.circuit, &case.obs, &objective, config)?;
    let (obp_kg, obp_kw, obp_groups) = match &opt.chosen {
        Some(p) => (p.kg, p.kw, p.groups),
        None => (opt.vanilla.kg, opt.vanilla.kw, opt.vanilla.groups),
    };
    let row = BenchRow {
        suite,
        circuit: case.name.clone(),
        qubits: case.circuit.num_qubits(),
        gates: case.circuit.len(),
        max_qubits: case.max_qubits,
        vanilla_kg: opt.vanilla.kg,
        vanilla_kw: opt.vanilla.kw,
        vanilla_cost: opt.vanilla.cost,
        w_opt: opt.chosen_w,
        obp_kg,
        obp_kw,
        obp_groups,
        obp_cost: opt.final_cost,
        ratio: opt.ratio,
    };
    Ok((row, opt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_build() {
        for s in Suite::ALL {
            let cases = suite_cases(s, 1).unwrap();
            assert!(!cases.is_empty());
            for c in cases {
                assert_eq!(c.obs.num_qubits(), c.circuit.num_qubits());
                assert!(c.max_qubits < c.circuit.num_qubits());
            }
        }
        assert_eq!(vqe6().unwrap().circuit.two_qubit_gate_count(), 5);
        assert_eq!("heis19".parse::<Suite>().unwrap(), Suite::Heis19);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    #[ignore]
    fn print_landscapes() {
        let cases = [vqe6().unwrap(), heis19().unwrap(), qaoa3().unwrap()];
        for case in cases {
            let objective = CutObjective::new(
                &case.circuit,
                &case.obs,
                CutOptions::max_qubits(case.max_qubits),
            );
            let v = crate::anneal::vanilla_cost(
                &case.circuit,
                &case.obs,
                &CutOptions::max_qubits(case.max_qubits),
            )
            .unwrap();
            println!("{} vanilla {:?}", case.name, v);
            for w in 1..=40 {
                let p = objective.point(w).unwrap();
                println!(
                    "  w={w:2} absorbed={}/{} gates={} groups={} kg={} kw={} cost={}",
                    p.slices_absorbed,
                    p.total_slices,
                    p.reduced_gates,
                    p.groups,
                    p.kg,
                    p.kw,
                    p.cost
                );
            }
        }
    }
}
