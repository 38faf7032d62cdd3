use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::synth::parity_phase;

use super::KineticParams;

/// Bit weights with `Σ_j w_j b_j = k̃` (the top bit carries `-2^(n-1)`).
fn weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let w = (1u64 << j) as f64;
            if j + 1 == n {
                -w
            } else {
                w
            }
        })
        .collect()
}

/// Diagonal kinetic step `diag(e^{-i k̃² s² Δt/2})` in the momentum basis.
///
/// Without an ancilla the width is `n` and pair terms use `CP`. With an
/// ancilla (qubit `n`, returned to `|0⟩`) each pair term uses
/// `b_i b_j = (b_i + b_j - b_i⊕b_j)/2` with the parity held on the ancilla.
/// Both are exact including the global phase. `params.paper_faithful`
/// switches to the literal per-qubit angle `φ/2^(2n-3)` and pair angle
/// `1/2^(2n-i-j-4)`, which does not reproduce the diagonal in general.
pub fn build_kinetic(n: usize, dt: f64, params: &KineticParams, use_ancilla: bool) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "kinetic operator needs at least one qubit".into(),
        ));
    }
    if params.paper_faithful && !use_ancilla {
        return Err(Error::InvalidArgument(
            "paper_faithful kinetic needs the ancilla".into(),
        ));
    }
    let width = n + usize::from(use_ancilla);
    let mut c = Circuit::new(width, 0);
    c.metadata.insert("label".into(), "kinetic".into());
    let phi = params.phi(dt);
    if dt == 0.0 {
        return Ok(c);
    }
    let anc = use_ancilla.then_some(n);

    if params.paper_faithful {
        let nn = n as i32;
        for i in 0..n {
            c.p(phi / 2f64.powi(2 * nn - 3), i);
        }
        for i in 0..n {
            for j in i + 1..n {
                let angle = 1.0 / 2f64.powi(2 * nn - i as i32 - j as i32 - 4);
                for g in parity_phase(&[i, j], angle, anc) {
                    c.push(g)?;
                }
            }
        }
        return Ok(c);
    }

    let w = weights(n);
    let mut single: Vec<f64> = w.iter().map(|wj| phi * wj * wj).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let cross = 2.0 * phi * w[i] * w[j];
            if use_ancilla {
                single[i] += cross / 2.0;
                single[j] += cross / 2.0;
                pairs.push((i, j, -cross / 2.0));
            } else {
                pairs.push((i, j, cross));
            }
        }
    }
    for (q, a) in single.iter().enumerate() {
        c.p(*a, q);
    }
    for (i, j, a) in pairs {
        if use_ancilla {
            for g in parity_phase(&[i, j], a, anc) {
                c.push(g)?;
            }
        } else {
            c.cp(a, i, j);
        }
    }
    Ok(c)
}
