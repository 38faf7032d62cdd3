use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};
use crate::statevector::{circuit_unitary, distance_up_to_phase};

use super::{ChipModel, Transpiled};

/// Every two-qubit gate sits on a chip edge; CX follows the edge direction.
pub fn respects_connectivity(circuit: &Circuit, chip: &ChipModel) -> bool {
    circuit.gates().iter().all(|g| match (&g.kind, g.qubits.as_slice()) {
        (_, [_]) => true,
        (GateKind::CX, [a, b]) => chip.allows_cx(*a, *b),
        (_, [a, b]) => chip.coupled(*a, *b),
        _ => false,
    })
}

/// Max-norm distance, up to global phase, between the transpiled unitary and
/// the original followed by the routing permutation. Only the physical qubits
/// that are touched or hold circuit qubits are simulated.
pub fn equivalence_distance(original: &Circuit, t: &Transpiled) -> Result<f64> {
    let np = t.circuit.num_qubits();
    let mut support: Vec<usize> = t.circuit.active_qubits();
    support.extend(&t.layout.mapping);
    support.extend(&t.final_layout);
    support.sort_unstable();
    support.dedup();
    let k = support.len();
    let mut loc = vec![usize::MAX; np];
    for (i, &p) in support.iter().enumerate() {
        loc[p] = i;
    }
    for &p in &support {
        let f = t.final_positions[p];
        if loc[f] == usize::MAX {
            return Err(Error::Routing(format!("content of {p} left the simulated support")));
        }
    }

    let relabel = |c: &Circuit, map: &dyn Fn(usize) -> usize| -> Result<Circuit> {
        let mut out = Circuit::try_new(k, 0)?;
        for g in c.gates().iter().filter(|g| g.is_unitary()) {
            out.push(Gate::new(g.kind.clone(), g.qubits.iter().map(|&q| map(q)).collect()))?;
        }
        Ok(out)
    };
    let actual = circuit_unitary(&relabel(&t.circuit, &|p| loc[p])?)?;
    let placed = circuit_unitary(&relabel(original, &|v| loc[t.layout.mapping[v]])?)?;

    // permutation: bit at loc(p) moves to loc(final_positions[p])
    let dim = 1usize << k;
    let mut perm = DMatrix::<Complex64>::zeros(dim, dim);
    for b in 0..dim {
        let mut img = 0;
        for &p in &support {
            if b >> loc[p] & 1 == 1 {
                img |= 1 << loc[t.final_positions[p]];
            }
        }
        perm[(img, b)] = Complex64::new(1.0, 0.0);
    }
    Ok(distance_up_to_phase(&actual, &(perm * placed)))
}

/// Measurement `(v, c)` of the original appears as `(final_layout[v], c)`.
pub fn measurements_mapped(original: &Circuit, t: &Transpiled) -> bool {
    let mut want: Vec<(usize, usize)> = original
        .measurements()
        .into_iter()
        .map(|(v, c)| (t.final_layout[v], c))
        .collect();
    let mut got = t.circuit.measurements();
    want.sort_unstable();
    got.sort_unstable();
    want == got
}
