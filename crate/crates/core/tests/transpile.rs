use qtunnel::transpile::*;
use qtunnel::tunnel::{
    build_evolution_circuit, Discretization, PotentialForm, PotentialSpec, TrotterConfig, WavepacketSpec,
};
use qtunnel::{Circuit, Gate, GateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize, measure: bool) -> Circuit {
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

fn tunnel_circuit() -> Circuit {
    let disc = Discretization::new(2, 2.194).unwrap();
    let pot = PotentialSpec::new("x1", 1.0).with_form(PotentialForm::SingleZLow);
    let cfg = TrotterConfig::new(0.1, 2);
    build_evolution_circuit(&disc, &pot, &WavepacketSpec::Basis { k: 0 }, &cfg, true).unwrap()
}

#[test]
fn random_circuits_survive_pipeline_on_both_chips() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for chip in [ChipModel::nairobi(), ChipModel::osaka()] {
        for i in 0..20 {
            let n = 1 + i % 4;
            let c = random_circuit(&mut rng, n, 25, i % 2 == 0);
            let t = transpile_pipeline(&c, &chip, &BasisSet::default(), &TranspileOptions::default()).unwrap();
            assert!(respects_connectivity(&t.circuit, &chip));
            assert!(t
                .circuit
                .gates()
                .iter()
                .all(|g| ["rz", "sx", "x", "cx", "measure"].contains(&g.kind.name())));
            let d = equivalence_distance(&c, &t).unwrap();
            assert!(d < 1e-9, "{} case {i}: distance {d}", chip.name);
            assert!(measurements_mapped(&c, &t));
            assert_eq!(optimize(&t.circuit), t.circuit);
        }
    }
}

#[test]
fn routing_preserves_unitary_up_to_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chip = ChipModel::line(4, 0.01).unwrap();
    for _ in 0..20 {
        let c = random_circuit(&mut rng, 4, 30, false);
        let layout = choose_layout(&c, &chip, LayoutStrategy::Trivial).unwrap();
        let routed = route(&c, &layout, &chip).unwrap();
        assert!(routed
            .circuit
            .gates()
            .iter()
            .all(|g| g.qubits.len() < 2 || chip.coupled(g.qubits[0], g.qubits[1])));
        let t = Transpiled {
            circuit: routed.circuit.clone(),
            layout,
            final_layout: routed.final_layout.clone(),
            final_positions: routed.final_positions.clone(),
            report: transpile_pipeline(&c, &chip, &BasisSet::default(), &TranspileOptions::default())
                .unwrap()
                .report,
        };
        assert!(equivalence_distance(&c, &t).unwrap() < 1e-9);
    }
}

#[test]
fn identity_chain_compiles_to_nothing() {
    let mut c = Circuit::new(3, 0);
    c.x(0)
        .x(0)
        .cx(0, 2)
        .cx(0, 2)
        .rz(0.4, 1)
        .rz(-0.4, 1)
        .swap(1, 2)
        .swap(1, 2)
        .h(2)
        .h(2);
    for chip in [
        ChipModel::nairobi(),
        ChipModel::osaka(),
        ChipModel::line(3, 0.01).unwrap(),
    ] {
        let t = transpile_pipeline(&c, &chip, &BasisSet::default(), &TranspileOptions::default()).unwrap();
        assert!(t.circuit.is_empty(), "{}", chip.name);
    }
}

#[test]
fn tunnel_circuit_on_directed_chip() {
    let c = tunnel_circuit();
    let osaka = ChipModel::osaka();
    let t = transpile_pipeline(&c, &osaka, &BasisSet::default(), &TranspileOptions::default()).unwrap();
    assert!(respects_connectivity(&t.circuit, &osaka));
    assert!(equivalence_distance(&c, &t).unwrap() < 1e-9);
    assert!(osaka.coupled(t.layout.mapping[0], t.layout.mapping[1]));
}

#[test]
fn chip_choice_changes_depth() {
    let c = tunnel_circuit();
    let opts = TranspileOptions::default();
    let a = transpile_pipeline(&c, &ChipModel::nairobi(), &BasisSet::default(), &opts).unwrap();
    let b = transpile_pipeline(&c, &ChipModel::osaka(), &BasisSet::default(), &opts).unwrap();
    assert_ne!(a.report.depth, b.report.depth);
    assert_eq!(a.report.passes.last().unwrap().pass, "optimize");
    assert_eq!(a.report.deltas().len(), a.report.passes.len() - 1);
}

#[test]
fn layout_is_deterministic() {
    let c = tunnel_circuit();
    let chip = ChipModel::osaka();
    let a = choose_layout(&decompose(&c).unwrap(), &chip, LayoutStrategy::default()).unwrap();
    let b = choose_layout(&decompose(&c).unwrap(), &chip, LayoutStrategy::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn report_round_trips_through_json() {
    let c = tunnel_circuit();
    let t = transpile_pipeline(
        &c,
        &ChipModel::nairobi(),
        &BasisSet::default(),
        &TranspileOptions::default(),
    )
    .unwrap();
    let s = serde_json::to_string(&t.report).unwrap();
    let back: TranspileReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back, t.report);
}
