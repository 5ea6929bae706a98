//! `obpcut` command-line front end.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use obpcut::anneal::{Cooling, SaConfig};
use obpcut::bench::Suite;
use obpcut::cut::{CutConstraint, CutOptions};
use obpcut::SlicePolicy;

/// Circuit cutting with operator backpropagation.
#[derive(Parser, Debug)]
#[command(name = "obpcut", version, about)]
struct Cli {
    /// Add wall-clock timings to the report. Reports without this flag are
    /// byte-identical across runs.
    #[arg(long, global = true)]
    timings: bool,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Backpropagate the observable through the tail of the circuit.
    Backprop(BackpropArgs),
    /// Find cuts for the circuit and report their cost.
    Cut(CutArgs),
    /// Anneal over the QWC group budget and compare with plain cutting.
    Optimize(OptimizeArgs),
    /// Check a reconstructed expectation against exact simulation.
    Verify(VerifyArgs),
    /// Run a shipped benchmark suite.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct Inputs {
    /// OpenQASM 2 circuit file.
    circuit: PathBuf,
    /// Observable file, one `<coeff> <pauli-word>` per line.
    observable: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct BackpropFlags {
    /// Largest QWC group count the evolved observable may reach.
    #[arg(long = "qwc-max", value_name = "W")]
    qwc_max: Option<usize>,

    /// L1 truncation budget per absorbed slice.
    #[arg(long = "trunc-eps", value_name = "E", default_value_t = 0.0)]
    trunc_eps: f64,

    /// How the circuit is sliced for backpropagation.
    #[arg(long, value_enum, default_value_t = SliceArg::Mixed)]
    slice: SliceArg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SliceArg {
    PerGate,
    PerLayer,
    Mixed,
}

impl From<SliceArg> for SlicePolicy {
    fn from(s: SliceArg) -> Self {
        match s {
            SliceArg::PerGate => SlicePolicy::PerGate,
            SliceArg::PerLayer => SlicePolicy::PerLayer,
            SliceArg::Mixed => SlicePolicy::Mixed,
        }
    }
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct ConstraintFlags {
    /// Every subcircuit has at most M qubits.
    #[arg(long = "max-qubits", value_name = "M")]
    max_qubits: Option<usize>,

    /// Split into two subcircuits of any size.
    #[arg(long)]
    bipartition: bool,
}

impl ConstraintFlags {
    fn options(&self, seed: u64) -> CutOptions {
        let constraint = match self.max_qubits {
            Some(m) => CutConstraint::MaxQubits(m),
            None => CutConstraint::Bipartition,
        };
        CutOptions { constraint, seed }
    }
}

#[derive(Args, Debug)]
struct BackpropArgs {
    #[command(flatten)]
    inputs: Inputs,

    #[command(flatten)]
    flags: BackpropFlags,

    /// Also write the reduced circuit as QASM here.
    #[arg(long, value_name = "FILE")]
    qasm_out: Option<PathBuf>,

    /// Also write the evolved observable here.
    #[arg(long, value_name = "FILE")]
    obs_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CutArgs {
    #[command(flatten)]
    inputs: Inputs,

    #[command(flatten)]
    constraint: ConstraintFlags,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Also write the plan JSON here.
    #[arg(long, value_name = "FILE")]
    plan_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CoolingArg {
    Literal,
    Geometric,
}

#[derive(Args, Debug, Clone)]
struct SaFlags {
    #[arg(long, default_value_t = 1)]
    lower: u32,
    #[arg(long, default_value_t = 40)]
    upper: u32,
    #[arg(long, default_value_t = 4)]
    step: u32,
    /// Initial temperature.
    #[arg(long, default_value_t = 10.0)]
    t0: f64,
    #[arg(long, default_value_t = 20)]
    iters: u32,
    #[arg(long, default_value_t = 5)]
    restarts: u32,
    #[arg(long, value_enum, default_value_t = CoolingArg::Literal)]
    cooling: CoolingArg,
    /// Factor for geometric cooling.
    #[arg(long, default_value_t = 0.9)]
    cooling_factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SaFlags {
    fn config(&self) -> SaConfig {
        let cooling = match self.cooling {
            CoolingArg::Literal => Cooling::Literal,
            CoolingArg::Geometric => Cooling::Geometric {
                factor: self.cooling_factor,
            },
        };
        SaConfig {
            lower: self.lower,
            upper: self.upper,
            step: self.step,
            t0: self.t0,
            iters: self.iters,
            restarts: self.restarts,
            seed: self.seed,
            cooling,
        }
    }
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[command(flatten)]
    inputs: Inputs,

    #[command(flatten)]
    constraint: ConstraintFlags,

    #[command(flatten)]
    sa: SaFlags,

    /// L1 truncation budget per absorbed slice.
    #[arg(long = "trunc-eps", value_name = "E", default_value_t = 0.0)]
    trunc_eps: f64,

    #[arg(long, value_enum, default_value_t = SliceArg::Mixed)]
    slice: SliceArg,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    inputs: Inputs,

    /// Verify this plan JSON on the circuit as given, without backpropagation.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["qwc_max", "max_qubits", "bipartition"])]
    plan: Option<PathBuf>,

    #[command(flatten)]
    flags: BackpropFlags,

    /// Every subcircuit has at most M qubits.
    #[arg(long = "max-qubits", value_name = "M", conflicts_with = "bipartition")]
    max_qubits: Option<usize>,

    /// Split into two subcircuits of any size.
    #[arg(long)]
    bipartition: bool,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Allowed |reconstructed - exact| on top of the truncation allowance.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,

    /// Estimate subexperiments from this many shots instead of exactly.
    #[arg(long)]
    shots: Option<u64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,

    #[command(flatten)]
    sa: SaFlags,

    /// Emit CSV rows instead of JSON.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Allow the 19-qubit suite.
    #[arg(long)]
    large: bool,

    /// Also check the recommended pipeline against exact simulation.
    #[arg(long)]
    verify: bool,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
enum CliError {
    /// Checks or tolerances failed: exit code 1.
    Validation(String),
    /// Inputs could not be read, parsed or satisfied: exit code 2.
    Input(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Input(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => ExitCode::from(outcome),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
