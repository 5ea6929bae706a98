//! Input loading, digests and report emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use obpcut::circuit::parse_qasm;
use obpcut::{Circuit, Observable};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SIM_LIMIT_ENV: &str = "QCUT_SIM_LIMIT";

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A parsed circuit and observable with the digests of their files.
pub struct LoadedInputs {
    pub circuit: Circuit,
    pub obs: Observable,
    pub digests: Value,
}

pub fn load(circuit: &Path, observable: &Path) -> Result<LoadedInputs, CliError> {
    let c_bytes = read(circuit)?;
    let o_bytes = read(observable)?;
    let c_text = String::from_utf8(c_bytes.clone())
        .map_err(|_| CliError::Input(format!("{}: not UTF-8", circuit.display())))?;
    let o_text = String::from_utf8(o_bytes.clone())
        .map_err(|_| CliError::Input(format!("{}: not UTF-8", observable.display())))?;
    let parsed =
        parse_qasm(&c_text).map_err(|e| CliError::Input(format!("{}: {e}", circuit.display())))?;
    let obs = Observable::parse_text(&o_text)
        .map_err(|e| CliError::Input(format!("{}: {e}", observable.display())))?;
    if obs.num_qubits() != parsed.num_qubits() {
        return Err(CliError::Input(format!(
            "observable acts on {} qubits but the circuit has {}",
            obs.num_qubits(),
            parsed.num_qubits()
        )));
    }
    let digests = serde_json::json!({
        "circuit_sha256": sha256_hex(&c_bytes),
        "observable_sha256": sha256_hex(&o_bytes),
    });
    Ok(LoadedInputs {
        circuit: parsed,
        obs,
        digests,
    })
}

/// Statevector width limit, overridable through the environment.
pub fn sim_limit() -> Result<usize, CliError> {
    match std::env::var(SIM_LIMIT_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{SIM_LIMIT_ENV}={v} is not a qubit count"))),
        Err(_) => Ok(obpcut::qpd::DEFAULT_QUBIT_LIMIT),
    }
}

/// Costs beyond `u64` do not fit a JSON value directly; they go through text
/// and come back as floats.
pub fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x)
        .or_else(|_| serde_json::to_string(x).and_then(|s| serde_json::from_str(&s)))
        .expect("report values serialize")
}

/// Ordered JSON object builder with optional wall-clock timings.
pub struct Report {
    fields: Map<String, Value>,
    timings: Option<BTreeMap<String, f64>>,
    clock: Instant,
}

impl Report {
    pub fn new(command: &str, timings: bool) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), Value::from(command));
        fields.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        Self {
            fields,
            timings: timings.then(BTreeMap::new),
            clock: Instant::now(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.fields.insert(key.into(), to_value(&value));
        self
    }

    /// Record the time since the previous mark under `phase`.
    pub fn mark(&mut self, phase: &str) {
        if let Some(t) = self.timings.as_mut() {
            t.insert(phase.into(), self.clock.elapsed().as_secs_f64() * 1e3);
            self.clock = Instant::now();
        }
    }

    pub fn into_value(mut self) -> Value {
        if let Some(t) = self.timings.take() {
            self.fields.insert("timings_ms".into(), to_value(&t));
        }
        Value::Object(self.fields)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Print `text` or write it to `output`.
pub fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON serializes");
    s.push('\n');
    s
}
