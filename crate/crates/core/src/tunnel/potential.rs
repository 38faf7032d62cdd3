use crate::circuit::Circuit;
use crate::error::Result;
use crate::synth::parity_phase;

use super::{PotentialForm, PotentialSpec};

/// Potential step: phase `e^{-ivΔt}` on every state matching the pattern.
///
/// Several fixed bits use `Π b = 2^{1-k} Σ_{S≠∅} (-1)^{|S|+1} parity_S`,
/// with the parities on the ancilla (qubit `n`) when `use_ancilla` is set.
/// `0` bits are X-conjugated. The `single_z_*` forms use one `RZ` and match
/// the pattern form up to global phase.
pub fn build_potential(spec: &PotentialSpec, dt: f64, use_ancilla: bool) -> Result<Circuit> {
    let n = spec.num_qubits();
    spec.validate(n)?;
    let width = n + usize::from(use_ancilla);
    let mut c = Circuit::new(width, 0);
    c.metadata.insert("label".into(), "potential".into());
    let theta = -spec.v * dt;
    if theta == 0.0 {
        return Ok(c);
    }
    match spec.form {
        PotentialForm::SingleZLow => {
            c.rz(theta, 0);
            return Ok(c);
        }
        PotentialForm::SingleZHigh => {
            c.rz(theta, n - 1);
            return Ok(c);
        }
        PotentialForm::Pattern => {}
    }
    let fixed = spec.fixed_bits();
    let k = fixed.len();
    if k == 0 {
        // every state matched: a global phase only
        return Ok(c);
    }
    let zeros: Vec<usize> = fixed.iter().filter(|(_, b)| !b).map(|(q, _)| *q).collect();
    for &q in &zeros {
        c.x(q);
    }
    let qubits: Vec<usize> = fixed.iter().map(|(q, _)| *q).collect();
    if k == 1 {
        c.p(theta, qubits[0]);
    } else {
        let anc = use_ancilla.then_some(n);
        let scale = theta / (1u64 << (k - 1)) as f64;
        for s in 1usize..1 << k {
            let members: Vec<usize> = (0..k).filter(|j| s >> j & 1 == 1).map(|j| qubits[j]).collect();
            let sign = if members.len() % 2 == 1 { 1.0 } else { -1.0 };
            for g in parity_phase(&members, sign * scale, anc) {
                c.push(g)?;
            }
        }
    }
    for &q in &zeros {
        c.x(q);
    }
    Ok(c)
}
