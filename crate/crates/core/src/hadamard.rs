//! Hadamard test estimating `Re{ψ}²` and `Im{ψ}²` of a prepared state.
//!
//! The test qubit `h` is appended as the highest qubit. The wrapped circuit
//! runs `H(h)`, controlled-W, `X(h)`, controlled-W*, `H(h)` and measures, so
//! `h = 0` carries `Re{ψ(x)}²` and `h = 1` carries `Im{ψ(x)}²`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::density::NoiseModel;
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};
use crate::sampling::{execute_counts, CountsDistribution};

#[derive(Clone, Debug)]
pub struct HadamardTestCircuit {
    pub base: Circuit,
    pub wrapped: Circuit,
    /// Measured working qubits `0..work_qubits`; clbit `work_qubits` is `hc`.
    pub work_qubits: usize,
    pub test_qubit: usize,
}

/// Estimated squared real and imaginary parts per working-register state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReImDistributions {
    pub re: BTreeMap<String, f64>,
    pub im: BTreeMap<String, f64>,
    pub shots: u64,
}

impl ReImDistributions {
    pub fn total(&self) -> f64 {
        self.re.values().sum::<f64>() + self.im.values().sum::<f64>()
    }

    pub fn re_mass(&self, key: &str) -> f64 {
        self.re.get(key).copied().unwrap_or(0.0)
    }

    pub fn im_mass(&self, key: &str) -> f64 {
        self.im.get(key).copied().unwrap_or(0.0)
    }
}

fn cu(theta: f64, phi: f64, lambda: f64, gamma: f64) -> GateKind {
    GateKind::CU {
        theta,
        phi,
        lambda,
        gamma,
    }
}

/// `gate` controlled on qubit `h` (which must not be among its qubits).
pub fn controlled(gate: &Gate, h: usize) -> Result<Gate> {
    use GateKind::*;
    let q = &gate.qubits;
    let with_h_first = |kind: GateKind| {
        let mut qs = vec![h];
        qs.extend_from_slice(q);
        Gate::new(kind, qs)
    };
    // diagonal gates: extend with h as the most significant local bit
    let controlled_diag = |phases: Vec<f64>| {
        let mut all = vec![0.0; phases.len()];
        all.extend(phases);
        let mut qs = q.clone();
        qs.push(h);
        Gate::new(Diag(all), qs)
    };
    let g = match &gate.kind {
        X => with_h_first(CX),
        CX => with_h_first(CCX),
        Swap => with_h_first(CSwap),
        P(t) => with_h_first(CP(*t)),
        H => with_h_first(cu(FRAC_PI_2, 0.0, PI, 0.0)),
        SX => with_h_first(cu(FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, FRAC_PI_4)),
        SXdg => with_h_first(cu(-FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_4)),
        RY(t) => with_h_first(cu(*t, 0.0, 0.0, 0.0)),
        RZ(t) => controlled_diag(vec![-t / 2.0, t / 2.0]),
        CZ => controlled_diag(vec![0.0, 0.0, 0.0, PI]),
        CP(t) => controlled_diag(vec![0.0, 0.0, 0.0, *t]),
        Diag(p) => controlled_diag(p.clone()),
        Measure(_) => return Err(Error::MeasurementPresent),
        kind @ (CCX | CSwap | CU { .. } | Qft | Iqft) => {
            return Err(Error::Unsupported(format!("controlled {}", kind.name())))
        }
    };
    Ok(g)
}

/// Wraps `base` (W with `W|0⟩ = |ψ⟩`) in the Hadamard test. The working
/// register width is read from metadata `work_qubits`, defaulting to all of
/// `base`'s qubits; higher qubits of `base` (e.g. a kinetic ancilla) are
/// carried along but not measured.
pub fn build_hadamard_test(base: &Circuit) -> Result<HadamardTestCircuit> {
    if base.has_measurements() {
        return Err(Error::MeasurementPresent);
    }
    let m = base.num_qubits();
    let work = base
        .metadata
        .get("work_qubits")
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .unwrap_or(m);
    if work == 0 || work > m {
        return Err(Error::InvalidCircuit(format!(
            "work_qubits {work} does not fit width {m}"
        )));
    }
    let h = m;
    let mut w = Circuit::try_new(m + 1, work + 1)?;
    w.h(h);
    for g in base.gates() {
        w.push(controlled(g, h)?)?;
    }
    w.x(h);
    for g in base.gates() {
        let conj = g.conjugate().ok_or(Error::MeasurementPresent)?;
        w.push(controlled(&conj, h)?)?;
    }
    w.h(h);
    for q in 0..work {
        w.measure(q, q);
    }
    w.measure(h, work);
    w.metadata.insert("label".into(), "hadamard_test".into());
    w.metadata.insert("work_qubits".into(), work.into());
    Ok(HadamardTestCircuit {
        base: base.clone(),
        wrapped: w,
        work_qubits: work,
        test_qubit: h,
    })
}

/// Splits counts on the most significant (`hc`) character and divides by the
/// total shots.
pub fn extract_re_im(counts: &CountsDistribution) -> Result<ReImDistributions> {
    if counts.num_bits() < 2 {
        return Err(Error::MalformedBitstring(format!(
            "{}-bit counts have no working register",
            counts.num_bits()
        )));
    }
    let shots = counts.shots() as f64;
    let mut re = BTreeMap::new();
    let mut im = BTreeMap::new();
    for (k, v) in counts.counts() {
        let (hc, rest) = k.split_at(1);
        let target = if hc == "0" { &mut re } else { &mut im };
        target.insert(rest.to_string(), *v as f64 / shots);
    }
    Ok(ReImDistributions {
        re,
        im,
        shots: counts.shots(),
    })
}

/// Builds, samples (noiselessly) and post-processes the test in one go.
pub fn run_hadamard_test(base: &Circuit, shots: u64, seed: u64) -> Result<ReImDistributions> {
    let test = build_hadamard_test(base)?;
    let counts = execute_counts(&test.wrapped, &NoiseModel::noiseless(), 1.0, shots, seed)?;
    extract_re_im(&counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{circuit_unitary, simulate_statevector};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn controlled_gates_are_block_diagonal() {
        let gates = [
            Gate::new(GateKind::X, vec![0]),
            Gate::new(GateKind::H, vec![1]),
            Gate::new(GateKind::SX, vec![0]),
            Gate::new(GateKind::SXdg, vec![1]),
            Gate::new(GateKind::RY(0.7), vec![0]),
            Gate::new(GateKind::RZ(0.4), vec![1]),
            Gate::new(GateKind::P(1.1), vec![0]),
            Gate::new(GateKind::CX, vec![1, 0]),
            Gate::new(GateKind::CZ, vec![0, 1]),
            Gate::new(GateKind::CP(0.9), vec![1, 0]),
            Gate::new(GateKind::Swap, vec![0, 1]),
            Gate::new(GateKind::Diag(vec![0.1, 0.2, 0.3, 0.4]), vec![1, 0]),
        ];
        for g in gates {
            let mut plain = Circuit::new(2, 0);
            plain.push(g.clone()).unwrap();
            let u = circuit_unitary(&plain).unwrap();
            let mut ctl = Circuit::new(3, 0);
            ctl.push(controlled(&g, 2).unwrap()).unwrap();
            let cu = circuit_unitary(&ctl).unwrap();
            for r in 0..8 {
                for c in 0..8 {
                    let want = match (r >> 2, c >> 2) {
                        (0, 0) => {
                            if r == c {
                                Complex64::new(1.0, 0.0)
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        }
                        (1, 1) => u[(r & 3, c & 3)],
                        _ => Complex64::new(0.0, 0.0),
                    };
                    assert!((cu[(r, c)] - want).norm() < 1e-12, "{} ({r},{c})", g.kind.name());
                }
            }
        }
        assert!(controlled(&Gate::new(GateKind::CCX, vec![0, 1, 2]), 3).is_err());
    }

    #[test]
    fn identity_base_gives_real_zero_state() {
        let r = run_hadamard_test(&Circuit::new(2, 0), 1000, 1).unwrap();
        assert_eq!(r.re, BTreeMap::from([("00".to_string(), 1.0)]));
        assert!(r.im.is_empty());
    }

    #[test]
    fn h_then_phase_splits_re_and_im() {
        // ψ = (|0⟩ + i|1⟩)/√2
        let mut base = Circuit::new(1, 0);
        base.h(0).p(std::f64::consts::FRAC_PI_2, 0);
        let t = build_hadamard_test(&base).unwrap();
        let unitary = t.wrapped.without_measurements();
        let out = simulate_statevector(&unitary, None).unwrap().probabilities();
        // index = h·2 + q
        assert!((out[0] - 0.5).abs() < 1e-12);
        assert!((out[3] - 0.5).abs() < 1e-12);
        assert!(out[1].abs() < 1e-12 && out[2].abs() < 1e-12);
    }

    #[test]
    fn extract_examples() {
        let c = CountsDistribution::new(2, 100, BTreeMap::from([("01".into(), 60), ("00".into(), 40)])).unwrap();
        let r = extract_re_im(&c).unwrap();
        assert!(r.im.is_empty());
        assert_eq!(r.re_mass("1"), 0.6);
        let c = CountsDistribution::new(2, 100, BTreeMap::from([("01".into(), 50), ("11".into(), 50)])).unwrap();
        let r = extract_re_im(&c).unwrap();
        assert_eq!((r.re_mass("1"), r.im_mass("1")), (0.5, 0.5));
        let one = CountsDistribution::new(1, 1, BTreeMap::from([("1".into(), 1)])).unwrap();
        assert!(extract_re_im(&one).is_err());
    }

    #[test]
    fn known_complex_amplitude() {
        // ψ = 0.6 + 0.8i on |0⟩ of one qubit: RY(0)=I, global phase via DIAG
        let theta = 0.8f64.atan2(0.6);
        let mut base = Circuit::new(1, 0);
        base.diag(vec![theta, 0.0], &[0]);
        let shots = 100_000u64;
        let r = run_hadamard_test(&base, shots, 17).unwrap();
        for (got, p) in [(r.re_mass("0"), 0.36), (r.im_mass("0"), 0.64)] {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            assert!((got - p).abs() < 3.0 * sigma, "{got} vs {p}");
        }
    }

    fn gate_strategy() -> impl Strategy<Value = Gate> {
        let q = 0usize..3;
        prop_oneof![
            q.clone().prop_map(|a| Gate::new(GateKind::H, vec![a])),
            q.clone().prop_map(|a| Gate::new(GateKind::X, vec![a])),
            q.clone().prop_map(|a| Gate::new(GateKind::SX, vec![a])),
            (q.clone(), -3.0f64..3.0).prop_map(|(a, t)| Gate::new(GateKind::RZ(t), vec![a])),
            (q.clone(), -3.0f64..3.0).prop_map(|(a, t)| Gate::new(GateKind::P(t), vec![a])),
            (0usize..3, 1usize..3, -3.0f64..3.0).prop_map(|(a, d, t)| Gate::new(GateKind::CP(t), vec![a, (a + d) % 3])),
            (0usize..3, 1usize..3).prop_map(|(a, d)| Gate::new(GateKind::CX, vec![a, (a + d) % 3])),
            (0usize..3, 1usize..3).prop_map(|(a, d)| Gate::new(GateKind::CZ, vec![a, (a + d) % 3])),
            (0usize..3, 1usize..3).prop_map(|(a, d)| Gate::new(GateKind::Swap, vec![a, (a + d) % 3])),
        ]
    }

    proptest! {
        #[test]
        fn conjugate_circuit_conjugates_state(gates in proptest::collection::vec(gate_strategy(), 1..30)) {
            let mut w = Circuit::new(3, 0);
            let mut ws = Circuit::new(3, 0);
            for g in &gates {
                w.push(g.clone()).unwrap();
                ws.push(g.conjugate().unwrap()).unwrap();
            }
            let a = simulate_statevector(&w, None).unwrap().conj();
            let b = simulate_statevector(&ws, None).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-10);
            }
        }

        #[test]
        fn exact_branches_are_re_and_im_squared(gates in proptest::collection::vec(gate_strategy(), 1..20)) {
            let mut w = Circuit::new(3, 0);
            for g in &gates {
                w.push(g.clone()).unwrap();
            }
            let psi = simulate_statevector(&w, None).unwrap();
            let t = build_hadamard_test(&w).unwrap();
            let out = simulate_statevector(&t.wrapped.without_measurements(), None).unwrap().probabilities();
            for (x, a) in psi.amplitudes().iter().enumerate() {
                prop_assert!((out[x] - a.re * a.re).abs() < 1e-10);
                prop_assert!((out[8 + x] - a.im * a.im).abs() < 1e-10);
            }
        }
    }
}
