use std::f64::consts::FRAC_PI_4;

use crate::circuit::Circuit;
use crate::error::Result;
use crate::gate::{Gate, GateKind};
use crate::synth::diag_gates;
use crate::tunnel::build_qft;

fn g(kind: GateKind, qubits: &[usize]) -> Gate {
    Gate::new(kind, qubits.to_vec())
}

/// Toffoli with six CX, exact.
fn ccx(a: usize, b: usize, c: usize) -> Vec<Gate> {
    use GateKind::*;
    let t = FRAC_PI_4;
    vec![
        g(H, &[c]),
        g(CX, &[b, c]),
        g(P(-t), &[c]),
        g(CX, &[a, c]),
        g(P(t), &[c]),
        g(CX, &[b, c]),
        g(P(-t), &[c]),
        g(CX, &[a, c]),
        g(P(t), &[b]),
        g(P(t), &[c]),
        g(H, &[c]),
        g(CX, &[a, b]),
        g(P(t), &[a]),
        g(P(-t), &[b]),
        g(CX, &[a, b]),
    ]
}

/// Single-qubit `U(θ, φ, λ) = P(φ)·RY(θ)·P(λ)`, exact.
fn u(theta: f64, phi: f64, lambda: f64, q: usize) -> Vec<Gate> {
    vec![
        g(GateKind::P(lambda), &[q]),
        g(GateKind::RY(theta), &[q]),
        g(GateKind::P(phi), &[q]),
    ]
}

/// One gate expanded to one- and two-qubit gates (one level).
fn expand(gate: &Gate) -> Result<Option<Vec<Gate>>> {
    use GateKind::*;
    let q = &gate.qubits;
    let out = match &gate.kind {
        CCX => ccx(q[0], q[1], q[2]),
        CSwap => {
            let (c, a, b) = (q[0], q[1], q[2]);
            let mut v = vec![g(CX, &[b, a])];
            v.extend(ccx(c, a, b));
            v.push(g(CX, &[b, a]));
            v
        }
        CU {
            theta,
            phi,
            lambda,
            gamma,
        } => {
            let (c, t) = (q[0], q[1]);
            let mut v = vec![
                g(P(*gamma + (lambda + phi) / 2.0), &[c]),
                g(P((lambda - phi) / 2.0), &[t]),
                g(CX, &[c, t]),
            ];
            v.extend(u(-theta / 2.0, 0.0, -(phi + lambda) / 2.0, t));
            v.push(g(CX, &[c, t]));
            v.extend(u(theta / 2.0, *phi, 0.0, t));
            v
        }
        Diag(phases) => diag_gates(phases, q)?,
        Qft | Iqft => {
            let c = build_qft(q.len(), gate.kind == Iqft);
            c.gates()
                .iter()
                .map(|x| Gate::new(x.kind.clone(), x.qubits.iter().map(|&i| q[i]).collect()))
                .collect()
        }
        _ => return Ok(None),
    };
    Ok(Some(out))
}

/// Expands composite gates (CCX, CSWAP, CU, DIAG, QFT/IQFT) until only one-
/// and two-qubit named gates remain. Equal to the input up to global phase.
pub fn decompose(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::try_new(circuit.num_qubits(), circuit.num_clbits())?;
    out.metadata = circuit.metadata.clone();
    let mut stack: Vec<Gate> = circuit.gates().iter().rev().cloned().collect();
    while let Some(gate) = stack.pop() {
        match expand(&gate)? {
            Some(parts) => stack.extend(parts.into_iter().rev()),
            None => out.push(gate)?,
        }
    }
    Ok(out)
}
