#![allow(dead_code)]

use std::path::PathBuf;

use qtunnel::{Circuit, Gate, GateKind};
use qtunnel_cli::ScenarioConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every shipped scenario with the subcommand it is meant for.
pub const SCENARIOS: &[(&str, &str)] = &[
    ("wall_1xxx", "simulate"),
    ("wells_x11x", "simulate"),
    ("wells_xxx1", "simulate"),
    ("endtoend", "endtoend"),
    ("rem", "rem"),
    ("hadamard", "hadamard"),
    ("transpile", "transpile"),
    ("pack", "pack"),
];

pub fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn scenario_path(name: &str) -> PathBuf {
    workspace().join("scenarios").join(format!("{name}.json"))
}

pub fn scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&scenario_path(name)).unwrap()
}

pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize, measure: bool) -> Circuit {
    let mut c = Circuit::new(n, if measure { n } else { 0 });
    for _ in 0..len {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n);
        while n > 1 && b == a {
            b = rng.random_range(0..n);
        }
        let t = rng.random_range(-3.2..3.2);
        let kind = match rng.random_range(0..10) {
            0 => GateKind::X,
            1 => GateKind::SX,
            2 => GateKind::H,
            3 => GateKind::RZ(t),
            4 => GateKind::P(t),
            5 => GateKind::RY(t),
            6 if n > 1 => GateKind::CX,
            7 if n > 1 => GateKind::CZ,
            8 if n > 1 => GateKind::CP(t),
            9 if n > 1 => GateKind::Swap,
            _ => GateKind::H,
        };
        let qs = if kind.arity() == Some(2) { vec![a, b] } else { vec![a] };
        c.push(Gate::new(kind, qs)).unwrap();
    }
    if measure {
        c.measure_all();
    }
    c
}
