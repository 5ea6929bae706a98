//! Command implementations. Each returns the process exit code on success.

use obpcut::anneal::{optimize, AnnealError, CutObjective};
use obpcut::bench::{run_case, suite_cases, BenchRow, Suite};
use obpcut::circuit::emit_qasm;
use obpcut::cut::{cost_with_circuit, find_cuts, CutError, CutPlan};
use obpcut::obp::{backpropagate, BackpropConfig, BackpropResult};
use obpcut::qpd::{
    exact_expectation, gate_cut_terms, reconstruct_with, wire_cut_terms, ReconstructOptions,
};
use obpcut::{Circuit, Observable};
use serde_json::{json, Value};

use crate::report::{emit, load, pretty, sim_limit, to_value, write_file, Report};
use crate::{
    BackpropArgs, BenchArgs, Cli, CliError, Command, CutArgs, Format, OptimizeArgs, VerifyArgs,
};

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let out = cli.output.as_deref();
    let (text, code) = match &cli.command {
        Command::Backprop(a) => backprop(a, cli.timings)?,
        Command::Cut(a) => cut(a, cli.timings)?,
        Command::Optimize(a) => optimize_cmd(a, cli.timings)?,
        Command::Verify(a) => verify(a, cli.timings)?,
        Command::Bench(a) => bench(a, cli.timings)?,
    };
    emit(&text, out)?;
    Ok(code)
}

fn cut_error(e: CutError) -> CliError {
    match e {
        CutError::InvalidPlan(_) => CliError::Validation(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

fn anneal_error(e: AnnealError) -> CliError {
    match e {
        AnnealError::Cut(c) => cut_error(c),
        other => CliError::Input(other.to_string()),
    }
}

fn backprop_summary(bp: &BackpropResult) -> Result<Value, CliError> {
    let obs_text = bp
        .evolved_obs
        .to_text()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(json!({
        "slices_absorbed": bp.slices_absorbed,
        "total_slices": bp.total_slices,
        "fully_absorbed": bp.fully_absorbed,
        "initial_group_count": bp.initial_group_count,
        "group_history": bp.group_history,
        "rejected_group_count": bp.rejected_group_count,
        "final_group_count": bp.group_count(),
        "evolved_terms": bp.evolved_obs.len(),
        "truncation_error_accrued": bp.truncation_error_accrued,
        "classical_expectation": bp.classical_expectation(),
        "reduced_gates": bp.reduced_circuit.len(),
        "reduced_qasm": emit_qasm(&bp.reduced_circuit),
        "evolved_observable": obs_text,
    }))
}

fn backprop(a: &BackpropArgs, timings: bool) -> Result<(String, u8), CliError> {
    let mut report = Report::new("backprop", timings);
    let inputs = load(&a.inputs.circuit, &a.inputs.observable)?;
    report.mark("load");
    let w = a
        .flags
        .qwc_max
        .ok_or_else(|| CliError::Input("--qwc-max is required".into()))?;
    let config = BackpropConfig {
        max_qwc_groups: w,
        trunc_budget: a.flags.trunc_eps,
        policy: a.flags.slice.into(),
    };
    let bp = backpropagate(&inputs.circuit, &inputs.obs, &config)
        .map_err(|e| CliError::Input(e.to_string()))?;
    report.mark("backprop");
    let summary = backprop_summary(&bp)?;
    if let Some(p) = &a.qasm_out {
        write_file(p, summary["reduced_qasm"].as_str().unwrap_or_default())?;
    }
    if let Some(p) = &a.obs_out {
        write_file(
            p,
            summary["evolved_observable"].as_str().unwrap_or_default(),
        )?;
    }
    report
        .set("inputs", inputs.digests)
        .set("config", config)
        .set("result", summary);
    Ok((pretty(&report.into_value()), 0))
}

fn cut(a: &CutArgs, timings: bool) -> Result<(String, u8), CliError> {
    let mut report = Report::new("cut", timings);
    let inputs = load(&a.inputs.circuit, &a.inputs.observable)?;
    report.mark("load");
    let options = a.constraint.options(a.seed);
    let plan = find_cuts(&inputs.circuit, &options).map_err(cut_error)?;
    report.mark("find_cuts");
    let cost = cost_with_circuit(&plan, &inputs.circuit, &inputs.obs).map_err(cut_error)?;
    if let Some(p) = &a.plan_out {
        write_file(p, &pretty(&to_value(&plan)))?;
    }
    report
        .set("inputs", inputs.digests)
        .set("options", options)
        .set("widths", plan.widths())
        .set("plan", &plan)
        .set("cost", cost);
    Ok((pretty(&report.into_value()), 0))
}

fn optimize_cmd(a: &OptimizeArgs, timings: bool) -> Result<(String, u8), CliError> {
    let mut report = Report::new("optimize", timings);
    let inputs = load(&a.inputs.circuit, &a.inputs.observable)?;
    report.mark("load");
    let config = a.sa.config();
    let options = a.constraint.options(a.sa.seed);
    let objective = CutObjective::new(&inputs.circuit, &inputs.obs, options)
        .with_truncation(a.trunc_eps)
        .with_policy(a.slice.into());
    let opt = optimize(&inputs.circuit, &inputs.obs, &objective, &config).map_err(anneal_error)?;
    report.mark("optimize");
    report
        .set("inputs", inputs.digests)
        .set("options", options)
        .set("sa_config", config)
        .set("trunc_eps", a.trunc_eps)
        .set("slice", obpcut::SlicePolicy::from(a.slice))
        .set("w_opt", opt.chosen_w)
        .set("opt_cost", opt.final_cost)
        .set("vanilla_cost", opt.vanilla.cost)
        .set("ratio", opt.ratio)
        .set("optimization", &opt);
    Ok((pretty(&report.into_value()), 0))
}

/// Per-cut term tables of a plan.
fn term_tables(circuit: &Circuit, plan: &CutPlan) -> Result<Value, CliError> {
    let mut gates = Vec::new();
    for &g in &plan.gate_cuts {
        let gate = &circuit.gates()[g];
        let terms = gate_cut_terms(gate).map_err(|e| CliError::Input(e.to_string()))?;
        gates.push(json!({ "gate": g, "op": gate.to_string(), "terms": terms }));
    }
    Ok(json!({ "gate_cuts": gates, "wire_cut_terms": wire_cut_terms() }))
}

/// Exact value of the pipeline's expectation, through `plan` when given.
struct PipelineValue {
    value: f64,
    combinations: u128,
    simulations: usize,
}

fn run_plan(
    circuit: &Circuit,
    plan: &CutPlan,
    obs: &Observable,
    opts: &ReconstructOptions,
) -> Result<PipelineValue, CliError> {
    let r = reconstruct_with(circuit, plan, obs, opts).map_err(|e| match e {
        obpcut::qpd::QpdError::Cut(c) => cut_error(c),
        other => CliError::Input(other.to_string()),
    })?;
    Ok(PipelineValue {
        value: r.value,
        combinations: r.combinations,
        simulations: r.simulations,
    })
}

fn verify(a: &VerifyArgs, timings: bool) -> Result<(String, u8), CliError> {
    let mut report = Report::new("verify", timings);
    let inputs = load(&a.inputs.circuit, &a.inputs.observable)?;
    let limit = sim_limit()?;
    report.mark("load");
    let exact = exact_expectation(&inputs.circuit, &inputs.obs, limit)
        .map_err(|e| CliError::Input(e.to_string()))?;
    report.mark("exact");
    let opts = ReconstructOptions {
        limit,
        shots: a.shots,
        seed: a.seed,
        ..ReconstructOptions::default()
    };
    let constraint = crate::ConstraintFlags {
        max_qubits: a.max_qubits,
        bipartition: a.bipartition,
    };

    let mut allowance = 0.0;
    let (value, plan_info) = if let Some(path) = &a.plan {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let plan: CutPlan = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        plan.validate(&inputs.circuit).map_err(cut_error)?;
        let cost = cost_with_circuit(&plan, &inputs.circuit, &inputs.obs).map_err(cut_error)?;
        let r = run_plan(&inputs.circuit, &plan, &inputs.obs, &opts)?;
        let info = json!({
            "mode": "plan",
            "plan": plan,
            "cost": cost,
            "terms": term_tables(&inputs.circuit, &plan)?,
            "combinations": r.combinations,
            "simulations": r.simulations,
        });
        (r.value, info)
    } else {
        let (circuit, obs, bp_info) = match a.flags.qwc_max {
            Some(w) => {
                let config = BackpropConfig {
                    max_qwc_groups: w,
                    trunc_budget: a.flags.trunc_eps,
                    policy: a.flags.slice.into(),
                };
                let bp = backpropagate(&inputs.circuit, &inputs.obs, &config)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                allowance = bp.slices_absorbed as f64 * a.flags.trunc_eps;
                let info = json!({
                    "config": config,
                    "slices_absorbed": bp.slices_absorbed,
                    "total_slices": bp.total_slices,
                    "fully_absorbed": bp.fully_absorbed,
                    "group_count": bp.group_count(),
                    "truncation_error_accrued": bp.truncation_error_accrued,
                });
                (bp.reduced_circuit, bp.evolved_obs, info)
            }
            None => (inputs.circuit.clone(), inputs.obs.clone(), Value::Null),
        };
        report.mark("backprop");
        if circuit.is_empty() {
            let v = obs.zero_state_expectation().re;
            (
                v,
                json!({ "mode": "pipeline", "backprop": bp_info, "plan": Value::Null, "combinations": 0, "simulations": 0 }),
            )
        } else {
            let plan = if constraint.max_qubits.is_some() || constraint.bipartition {
                find_cuts(&circuit, &constraint.options(a.seed)).map_err(cut_error)?
            } else {
                CutPlan::uncut(&circuit)
            };
            let cost = cost_with_circuit(&plan, &circuit, &obs).map_err(cut_error)?;
            let r = run_plan(&circuit, &plan, &obs, &opts)?;
            let info = json!({
                "mode": "pipeline",
                "backprop": bp_info,
                "plan": plan,
                "cost": cost,
                "terms": term_tables(&circuit, &plan)?,
                "combinations": r.combinations,
                "simulations": r.simulations,
            });
            (r.value, info)
        }
    };
    report.mark("reconstruct");
    let delta = (value - exact).abs();
    let allowed = a.tolerance + allowance;
    let pass = delta <= allowed;
    report
        .set("inputs", inputs.digests)
        .set("simulator_limit", limit)
        .set("shots", a.shots)
        .set("exact", exact)
        .set("reconstructed", value)
        .set("abs_delta", delta)
        .set("allowed", allowed)
        .set("pass", pass)
        .set("details", plan_info);
    Ok((pretty(&report.into_value()), if pass { 0 } else { 1 }))
}

fn bench_verify(
    case: &obpcut::bench::BenchCase,
    w: Option<u32>,
    seed: u64,
    limit: usize,
) -> Result<Value, CliError> {
    let options = obpcut::cut::CutOptions {
        seed: obpcut::util::derive_seed(seed, u64::MAX),
        ..obpcut::cut::CutOptions::max_qubits(case.max_qubits)
    };
    let exact = exact_expectation(&case.circuit, &case.obs, limit)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let (circuit, obs) = match w {
        Some(w) => {
            let bp = backpropagate(&case.circuit, &case.obs, &BackpropConfig::new(w as usize))
                .map_err(|e| CliError::Input(e.to_string()))?;
            (bp.reduced_circuit, bp.evolved_obs)
        }
        None => (case.circuit.clone(), case.obs.clone()),
    };
    let value = if circuit.is_empty() {
        obs.zero_state_expectation().re
    } else {
        let plan = find_cuts(&circuit, &options).map_err(cut_error)?;
        let opts = ReconstructOptions {
            limit,
            ..ReconstructOptions::default()
        };
        run_plan(&circuit, &plan, &obs, &opts)?.value
    };
    Ok(json!({ "exact": exact, "reconstructed": value, "abs_delta": (value - exact).abs() }))
}

fn bench(a: &BenchArgs, timings: bool) -> Result<(String, u8), CliError> {
    if a.suite == Suite::Heis19 && !a.large {
        return Err(CliError::Input("the heis19 suite needs --large".into()));
    }
    let mut report = Report::new("bench", timings);
    let config = a.sa.config();
    let cases = suite_cases(a.suite, a.sa.seed).map_err(|e| CliError::Input(e.to_string()))?;
    let limit = sim_limit()?;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut checks = Vec::new();
    let mut failed = false;
    for case in &cases {
        let (row, _) = run_case(a.suite, case, &config).map_err(anneal_error)?;
        report.mark(&format!("optimize:{}", case.name));
        if a.verify {
            let check = bench_verify(case, row.w_opt, a.sa.seed, limit)?;
            failed |= check["abs_delta"].as_f64().unwrap_or(f64::INFINITY) > 1e-9;
            checks.push(json!({ "circuit": case.name, "oracle": check }));
            report.mark(&format!("verify:{}", case.name));
        }
        failed |= row.obp_cost > row.vanilla_cost;
        rows.push(row);
    }
    let code = if failed { 1 } else { 0 };
    match a.format {
        Format::Csv => {
            let mut text = String::from(BenchRow::CSV_HEADER);
            text.push('\n');
            for r in &rows {
                text.push_str(&r.to_csv());
                text.push('\n');
            }
            Ok((text, code))
        }
        Format::Json => {
            report
                .set("suite", a.suite)
                .set("sa_config", config)
                .set("rows", &rows);
            if a.verify {
                report.set("oracle", checks);
            }
            Ok((pretty(&report.into_value()), code))
        }
    }
}
