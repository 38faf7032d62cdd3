use std::f64::consts::PI;

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::gate::{Gate, GateKind};

use super::translate::wrap_angle;

const ANGLE_TOL: f64 = 1e-12;
const MATRIX_TOL: f64 = 1e-10;

type M2 = [Complex64; 4];

fn same_qubit_set(a: &Gate, b: &Gate) -> bool {
    let mut x = a.qubits.clone();
    let mut y = b.qubits.clone();
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

fn symmetric(kind: &GateKind) -> bool {
    matches!(kind, GateKind::Swap | GateKind::CZ | GateKind::CP(_))
}

/// `p` followed by `g` is the identity.
fn cancels(p: &Gate, g: &Gate) -> bool {
    let Some(inv) = p.inverse() else {
        return false;
    };
    if inv == *g {
        return true;
    }
    symmetric(&g.kind) && inv.kind == g.kind && same_qubit_set(p, g)
}

enum Merge {
    Keep,
    Remove,
    Replace(Gate),
}

fn merge(p: &Gate, g: &Gate) -> Merge {
    use GateKind::*;
    let angle = |t: f64, make: fn(f64) -> GateKind, qubits: &[usize]| {
        let t = wrap_angle(t);
        if t.abs() < ANGLE_TOL {
            Merge::Remove
        } else {
            Merge::Replace(Gate::new(make(t), qubits.to_vec()))
        }
    };
    match (&p.kind, &g.kind) {
        (RZ(a), RZ(b)) => angle(a + b, RZ, &p.qubits),
        (P(a), P(b)) => angle(a + b, P, &p.qubits),
        (CP(a), CP(b)) if same_qubit_set(p, g) => angle(a + b, CP, &p.qubits),
        (SX, SX) => Merge::Replace(Gate::new(X, p.qubits.clone())),
        _ => Merge::Keep,
    }
}

/// One sweep of cancellation and merging over per-qubit stacks.
fn peephole(circuit: &Circuit) -> Vec<Gate> {
    let n = circuit.num_qubits();
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(circuit.len());
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for g in circuit.gates() {
        // the last live gate must be the top of the stack on every qubit of g
        let top = stacks[g.qubits[0]].last().copied();
        let shared = top.filter(|&i| {
            g.qubits.iter().all(|&q| stacks[q].last() == Some(&i))
                && out[i].as_ref().is_some_and(|p| same_qubit_set(p, g))
        });
        if let Some(i) = shared {
            let p = out[i].as_ref().unwrap();
            if p.is_unitary() && g.is_unitary() {
                if cancels(p, g) {
                    for &q in &g.qubits {
                        stacks[q].pop();
                    }
                    out[i] = None;
                    continue;
                }
                match merge(p, g) {
                    Merge::Remove => {
                        for &q in &g.qubits {
                            stacks[q].pop();
                        }
                        out[i] = None;
                        continue;
                    }
                    Merge::Replace(r) => {
                        out[i] = Some(r);
                        continue;
                    }
                    Merge::Keep => {}
                }
            }
        }
        let idx = out.len();
        out.push(Some(g.clone()));
        for &q in &g.qubits {
            stacks[q].push(idx);
        }
    }
    out.into_iter().flatten().collect()
}

fn mul(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn gate_m2(g: &Gate) -> M2 {
    let m = g.matrix().expect("unitary");
    [m[0], m[1], m[2], m[3]]
}

fn product(gates: &[Gate]) -> M2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    gates
        .iter()
        .fold([one, zero, zero, one], |acc, g| mul(&gate_m2(g), &acc))
}

fn equal_up_to_phase(a: &M2, b: &M2) -> bool {
    let inner: Complex64 = (0..4).map(|i| a[i].conj() * b[i]).sum();
    let phase = if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    (0..4).all(|i| (a[i] * phase - b[i]).norm() < MATRIX_TOL)
}

/// Shortest `{rz, sx, x}` sequence found for `u` (up to global phase).
fn synthesize(u: &M2, q: usize) -> Vec<Gate> {
    use GateKind::*;
    let rz = |t: f64| Gate::new(RZ(wrap_angle(t)), vec![q]);
    let prune = |v: Vec<Gate>| -> Vec<Gate> {
        v.into_iter()
            .filter(|g| !matches!(g.kind, RZ(t) if t.abs() < ANGLE_TOL))
            .collect()
    };
    // SU(2) normalization, then ZYZ angles: U ∝ RZ(φ)·RY(θ)·RZ(λ)
    let det = u[0] * u[3] - u[1] * u[2];
    let s = det.sqrt();
    let v = [u[0] / s, u[1] / s, u[2] / s, u[3] / s];
    let theta = 2.0 * v[2].norm().atan2(v[0].norm());
    let sum = if v[3].norm() > 1e-14 { 2.0 * v[3].arg() } else { 0.0 };
    let diff = if v[2].norm() > 1e-14 { 2.0 * v[2].arg() } else { 0.0 };
    let (phi, lambda) = ((sum + diff) / 2.0, (sum - diff) / 2.0);

    let candidates = vec![
        vec![],
        vec![rz(phi + lambda)],
        vec![Gate::new(X, vec![q])],
        vec![Gate::new(SX, vec![q])],
        vec![Gate::new(X, vec![q]), rz(phi - lambda)],
        vec![rz(lambda - PI / 2.0), Gate::new(SX, vec![q]), rz(phi + PI / 2.0)],
        vec![
            rz(lambda + PI / 2.0),
            Gate::new(SX, vec![q]),
            Gate::new(X, vec![q]),
            rz(phi - PI / 2.0),
        ],
        vec![
            rz(lambda),
            Gate::new(SX, vec![q]),
            rz(theta + PI),
            Gate::new(SX, vec![q]),
            rz(phi + PI),
        ],
    ];
    let mut best: Option<Vec<Gate>> = None;
    for c in candidates {
        let c = prune(c);
        if equal_up_to_phase(&product(&c), u) && best.as_ref().is_none_or(|b| c.len() < b.len()) {
            best = Some(c);
        }
    }
    best.expect("generic ZSX form always matches")
}

/// Replaces each maximal run of one-qubit gates on a wire by a shorter
/// equivalent sequence when one exists.
fn resynthesize(n: usize, gates: Vec<Gate>) -> Vec<Gate> {
    let mut removed = vec![false; gates.len()];
    let mut insert_at: Vec<Vec<Gate>> = vec![Vec::new(); gates.len()];
    let mut runs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let flush = |run: &mut Vec<usize>, removed: &mut Vec<bool>, insert_at: &mut Vec<Vec<Gate>>| {
        if run.len() >= 2 {
            let seq: Vec<Gate> = run.iter().map(|&i| gates[i].clone()).collect();
            let q = seq[0].qubits[0];
            let new = synthesize(&product(&seq), q);
            if new.len() < seq.len() {
                for &i in run.iter() {
                    removed[i] = true;
                }
                insert_at[*run.last().unwrap()] = new;
            }
        }
        run.clear();
    };
    for (i, g) in gates.iter().enumerate() {
        if g.qubits.len() == 1 && g.is_unitary() {
            runs[g.qubits[0]].push(i);
        } else {
            for &q in &g.qubits {
                flush(&mut runs[q], &mut removed, &mut insert_at);
            }
        }
    }
    for run in runs.iter_mut() {
        flush(run, &mut removed, &mut insert_at);
    }
    let mut out = Vec::with_capacity(gates.len());
    for (i, g) in gates.into_iter().enumerate() {
        if !removed[i] {
            out.push(g);
        }
        out.append(&mut insert_at[i]);
    }
    out
}

/// Peephole optimization to a fixed point: adjacent inverse pairs cancel,
/// RZ/P/CP angles merge modulo 2π (zero rotations dropped), SX·SX becomes X,
/// and one-qubit runs are resynthesized when that is strictly shorter.
/// Never increases the gate count. Measurements act as barriers.
///
/// Must not be applied to noise-folded circuits: it undoes the folding.
pub fn optimize(circuit: &Circuit) -> Circuit {
    let mut cur = circuit.clone();
    loop {
        let gates = resynthesize(cur.num_qubits(), peephole(&cur));
        let changed = gates.as_slice() != cur.gates();
        let mut next = Circuit::new(cur.num_qubits(), cur.num_clbits());
        next.metadata = cur.metadata.clone();
        for g in gates {
            next.push(g).expect("gates come from a valid circuit");
        }
        cur = next;
        if !changed {
            return cur;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{circuit_unitary, distance_up_to_phase};
    use proptest::prelude::*;

    fn same(a: &Circuit, b: &Circuit) -> bool {
        distance_up_to_phase(&circuit_unitary(a).unwrap(), &circuit_unitary(b).unwrap()) < 1e-9
    }

    #[test]
    fn cx_pair_vanishes() {
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1).cx(0, 1);
        assert!(optimize(&c).is_empty());
    }

    #[test]
    fn opposite_rotations_vanish() {
        let mut c = Circuit::new(1, 0);
        c.rz(0.3, 0).rz(-0.3, 0);
        assert!(optimize(&c).is_empty());
    }

    #[test]
    fn reversed_cx_does_not_cancel() {
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1).cx(1, 0);
        assert_eq!(optimize(&c).len(), 2);
    }

    #[test]
    fn swap_and_cz_cancel_in_either_order() {
        let mut c = Circuit::new(2, 0);
        c.swap(0, 1).swap(1, 0).cz(0, 1).cz(1, 0);
        assert!(optimize(&c).is_empty());
    }

    #[test]
    fn sx_pair_becomes_x() {
        let mut c = Circuit::new(1, 0);
        c.sx(0).sx(0);
        let o = optimize(&c);
        assert_eq!(o.gates(), &[Gate::new(GateKind::X, vec![0])]);
    }

    #[test]
    fn nested_cancellation_reaches_fixed_point() {
        let mut c = Circuit::new(2, 0);
        c.x(1).cx(0, 1).rz(0.5, 0).rz(-0.5, 0).cx(0, 1).x(1);
        assert!(optimize(&c).is_empty());
    }

    #[test]
    fn measurements_survive() {
        let mut c = Circuit::new(2, 2);
        c.x(0).x(0).cx(0, 1).measure(0, 0).measure(1, 1);
        let o = optimize(&c);
        assert_eq!(o.len(), 3);
        assert_eq!(o.measurements(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn folded_gate_collapses_back() {
        let g = Gate::new(GateKind::SX, vec![0]);
        let mut c = Circuit::new(2, 0);
        c.push(g.clone()).unwrap();
        c.push(g.inverse().unwrap()).unwrap();
        c.push(g.clone()).unwrap();
        c.cx(0, 1).cx(0, 1).cx(0, 1);
        let o = optimize(&c);
        assert_eq!(o.len(), 2);
        assert!(same(&c, &o));
    }

    #[test]
    fn translated_hadamard_pair_vanishes() {
        let mut c = Circuit::new(1, 0);
        c.h(0).h(0);
        let t = super::super::translate(&c, &Default::default(), None).unwrap();
        assert!(optimize(&t).is_empty());
    }

    #[test]
    fn synthesis_matches_random_unitaries() {
        for k in 0..50 {
            let t = k as f64;
            let mut c = Circuit::new(1, 0);
            c.rz(0.3 * t, 0)
                .ry(1.1 + 0.7 * t, 0)
                .rz(-0.2 * t, 0)
                .sx(0)
                .p(0.9 * t, 0);
            let u = product(c.gates());
            let s = synthesize(&u, 0);
            assert!(s.len() <= 5);
            assert!(equal_up_to_phase(&product(&s), &u));
        }
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let q = 0..n;
        let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
        let angle = prop_oneof![Just(0.5), Just(-0.5), Just(PI), -3.0..3.0f64];
        prop_oneof![
            q.clone().prop_map(|a| Gate::new(GateKind::X, vec![a])),
            q.clone().prop_map(|a| Gate::new(GateKind::SX, vec![a])),
            q.clone().prop_map(|a| Gate::new(GateKind::H, vec![a])),
            (angle.clone(), q.clone()).prop_map(|(t, a)| Gate::new(GateKind::RZ(t), vec![a])),
            (angle.clone(), q.clone()).prop_map(|(t, a)| Gate::new(GateKind::P(t), vec![a])),
            pair.clone().prop_map(|(a, b)| Gate::new(GateKind::CX, vec![a, b])),
            pair.clone().prop_map(|(a, b)| Gate::new(GateKind::Swap, vec![a, b])),
            (angle, pair).prop_map(|(t, (a, b))| Gate::new(GateKind::CP(t), vec![a, b])),
        ]
    }

    proptest! {
        #[test]
        fn optimizer_is_sound_monotone_idempotent(gates in prop::collection::vec(arb_gate(3), 0..30)) {
            let mut c = Circuit::new(3, 0);
            for g in gates {
                c.push(g).unwrap();
            }
            let o = optimize(&c);
            prop_assert!(o.len() <= c.len());
            prop_assert!(same(&c, &o));
            prop_assert_eq!(optimize(&o), o);
        }
    }
}
