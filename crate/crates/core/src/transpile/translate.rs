use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};

use super::{decompose, ChipModel};

/// Allowed gate names of the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSet {
    pub gates: BTreeSet<String>,
}

impl Default for BasisSet {
    fn default() -> Self {
        BasisSet::new(&["rz", "sx", "x", "cx"])
    }
}

impl BasisSet {
    pub fn new(names: &[&str]) -> Self {
        BasisSet {
            gates: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.gates.contains(name)
    }

    /// Translation targets `{rz, sx, x, cx}`, so all four must be present.
    pub fn validate(&self) -> Result<()> {
        for need in ["rz", "sx", "x", "cx"] {
            if !self.contains(need) {
                return Err(Error::InvalidArgument(format!(
                    "basis {:?} is not universal for this translator (missing {need})",
                    self.gates
                )));
            }
        }
        Ok(())
    }
}

fn g(kind: GateKind, qubits: &[usize]) -> Gate {
    Gate::new(kind, qubits.to_vec())
}

fn h(q: usize) -> Vec<Gate> {
    vec![
        g(GateKind::RZ(FRAC_PI_2), &[q]),
        g(GateKind::SX, &[q]),
        g(GateKind::RZ(FRAC_PI_2), &[q]),
    ]
}

/// CX respecting edge direction; reversed edges are H-conjugated.
fn cx(c: usize, t: usize, chip: Option<&ChipModel>) -> Vec<Gate> {
    match chip {
        Some(chip) if !chip.allows_cx(c, t) && chip.allows_cx(t, c) => {
            let mut v = h(c);
            v.extend(h(t));
            v.push(g(GateKind::CX, &[t, c]));
            v.extend(h(c));
            v.extend(h(t));
            v
        }
        _ => vec![g(GateKind::CX, &[c, t])],
    }
}

fn lower(gate: &Gate, chip: Option<&ChipModel>) -> Result<Vec<Gate>> {
    use GateKind::*;
    let q = &gate.qubits;
    Ok(match &gate.kind {
        X | SX | RZ(_) | Measure(_) => vec![gate.clone()],
        CX => cx(q[0], q[1], chip),
        // SX† = SX³ = X·SX
        SXdg => vec![g(SX, &[q[0]]), g(X, &[q[0]])],
        H => h(q[0]),
        P(t) => vec![g(RZ(*t), &[q[0]])],
        // RY(θ) = SX·RZ(-θ)·SX† up to phase
        RY(t) => vec![g(SX, &[q[0]]), g(X, &[q[0]]), g(RZ(-t), &[q[0]]), g(SX, &[q[0]])],
        CZ => {
            let mut v = h(q[1]);
            v.extend(cx(q[0], q[1], chip));
            v.extend(h(q[1]));
            v
        }
        CP(t) => {
            let (a, b) = (q[0], q[1]);
            let mut v = vec![g(RZ(t / 2.0), &[a])];
            v.extend(cx(a, b, chip));
            v.push(g(RZ(-t / 2.0), &[b]));
            v.extend(cx(a, b, chip));
            v.push(g(RZ(t / 2.0), &[b]));
            v
        }
        Swap => {
            let (a, b) = (q[0], q[1]);
            let mut v = cx(a, b, chip);
            v.extend(cx(b, a, chip));
            v.extend(cx(a, b, chip));
            v
        }
        CCX | CSwap | CU { .. } | Diag(_) | Qft | Iqft => {
            let mut tmp = Circuit::try_new(q.iter().max().unwrap() + 1, 0)?;
            tmp.push(gate.clone())?;
            let mut v = Vec::new();
            for part in decompose(&tmp)?.gates() {
                v.extend(lower(part, chip)?);
            }
            v
        }
    })
}

/// Rewrites every gate not in `basis` into `{rz, sx, x, cx}`. With a directed
/// `chip`, CX gates against an edge direction are reversed through H gates.
pub fn translate(circuit: &Circuit, basis: &BasisSet, chip: Option<&ChipModel>) -> Result<Circuit> {
    basis.validate()?;
    let mut out = Circuit::try_new(circuit.num_qubits(), circuit.num_clbits())?;
    out.metadata = circuit.metadata.clone();
    for gate in circuit.gates() {
        let keep = basis.contains(gate.kind.name())
            && !(gate.kind == GateKind::CX && chip.is_some_and(|c| !c.allows_cx(gate.qubits[0], gate.qubits[1])));
        if keep || matches!(gate.kind, GateKind::Measure(_)) {
            out.push(gate.clone())?;
        } else {
            for part in lower(gate, chip)? {
                out.push(part)?;
            }
        }
    }
    Ok(out)
}

/// Normalizes an angle to `(-π, π]`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}
