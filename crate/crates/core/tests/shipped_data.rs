use obpcut::circuit::{coupling_map_from_text, heavy_hex_19, parse_qasm};
use obpcut::Observable;

fn read(rel: &str) -> String {
    std::fs::read_to_string(format!("{}/../../{rel}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn heavy_hex_config_matches_generator() {
    let mut edges = coupling_map_from_text(&read("configs/heavy_hex_19.txt")).unwrap();
    edges.sort_unstable();
    assert_eq!(edges, heavy_hex_19());
}

#[test]
fn sample_inputs_parse() {
    let c = parse_qasm(&read("data/ladder4.qasm")).unwrap();
    let o = Observable::parse_text(&read("data/ladder4.obs")).unwrap();
    assert_eq!(c.num_qubits(), o.num_qubits());
}
