//! Small synthesis routines: parity phases, diagonal-gate expansion and
//! amplitude-encoding state preparation.

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};

/// Phases below this magnitude are dropped from synthesized networks.
const ANGLE_EPS: f64 = 1e-14;

/// Gates applying `e^{iθ·(b_{q0} ⊕ b_{q1} ⊕ …)}`.
///
/// With `ancilla`, the parity is accumulated on that qubit (assumed `|0⟩`)
/// and uncomputed afterwards; otherwise a CX ladder folds it onto the last
/// listed qubit and unfolds it again.
pub fn parity_phase(qubits: &[usize], theta: f64, ancilla: Option<usize>) -> Vec<Gate> {
    let mut out = Vec::new();
    match (qubits, ancilla) {
        ([], _) => {}
        ([q], _) => out.push(Gate::new(GateKind::P(theta), vec![*q])),
        (_, Some(a)) => {
            for &q in qubits {
                out.push(Gate::new(GateKind::CX, vec![q, a]));
            }
            out.push(Gate::new(GateKind::P(theta), vec![a]));
            for &q in qubits.iter().rev() {
                out.push(Gate::new(GateKind::CX, vec![q, a]));
            }
        }
        (_, None) => {
            let (&target, rest) = qubits.split_last().expect("non-empty");
            for &q in rest {
                out.push(Gate::new(GateKind::CX, vec![q, target]));
            }
            out.push(Gate::new(GateKind::P(theta), vec![target]));
            for &q in rest.iter().rev() {
                out.push(Gate::new(GateKind::CX, vec![q, target]));
            }
        }
    }
    out
}

/// Coefficients `d_S` with `f(x) = d_∅ + Σ_{S≠∅} d_S·parity_S(x)`, indexed by
/// the subset mask `S` over local bits.
pub fn parity_coefficients(phases: &[f64]) -> Vec<f64> {
    let dim = phases.len();
    // Walsh transform: f(x) = Σ_S c_S (-1)^{S·x}
    let mut c = phases.to_vec();
    let mut h = 1;
    while h < dim {
        for i in (0..dim).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (c[j], c[j + h]);
                c[j] = a + b;
                c[j + h] = a - b;
            }
        }
        h *= 2;
    }
    for x in c.iter_mut() {
        *x /= dim as f64;
    }
    // (-1)^p = 1 - 2p
    let mut d = vec![0.0; dim];
    d[0] = c.iter().sum();
    for s in 1..dim {
        d[s] = -2.0 * c[s];
    }
    d
}

/// Expands `Diag(phases)` on `qubits` into P and CX gates. Exact up to the
/// global phase `e^{i·phases[0]}`.
pub fn diag_gates(phases: &[f64], qubits: &[usize]) -> Result<Vec<Gate>> {
    if phases.len() != 1 << qubits.len() {
        return Err(Error::InvalidGate(format!(
            "diag on {} qubit(s) needs {} phases",
            qubits.len(),
            1usize << qubits.len()
        )));
    }
    let d = parity_coefficients(phases);
    let mut out = Vec::new();
    for (s, &theta) in d.iter().enumerate().skip(1) {
        if theta.abs() < ANGLE_EPS {
            continue;
        }
        let members: Vec<usize> = (0..qubits.len())
            .filter(|j| s >> j & 1 == 1)
            .map(|j| qubits[j])
            .collect();
        if members.len() == 2 {
            // p_{ab} = a + b - 2ab, so e^{iθ p_{ab}} = P(θ)_a P(θ)_b CP(-2θ)
            out.push(Gate::new(GateKind::P(theta), vec![members[0]]));
            out.push(Gate::new(GateKind::P(theta), vec![members[1]]));
            out.push(Gate::new(GateKind::CP(-2.0 * theta), members));
        } else {
            out.extend(parity_phase(&members, theta, None));
        }
    }
    Ok(out)
}

/// Uniformly controlled RY: for each value `j` of `controls` (bit `m` of `j`
/// is `controls[m]`), rotates `target` by `alphas[j]`.
pub fn uniformly_controlled_ry(alphas: &[f64], controls: &[usize], target: usize) -> Vec<Gate> {
    let k = controls.len();
    let dim = 1usize << k;
    assert_eq!(alphas.len(), dim);
    if k == 0 {
        return vec![Gate::new(GateKind::RY(alphas[0]), vec![target])];
    }
    let gray = |i: usize| i ^ (i >> 1);
    let mut out = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        let g = gray(i);
        let theta: f64 = alphas
            .iter()
            .enumerate()
            .map(|(j, a)| if (j & g).count_ones() % 2 == 0 { *a } else { -a })
            .sum::<f64>()
            / dim as f64;
        out.push(Gate::new(GateKind::RY(theta), vec![target]));
        let changed = if i + 1 == dim {
            k - 1
        } else {
            (i + 1).trailing_zeros() as usize
        };
        out.push(Gate::new(GateKind::CX, vec![controls[changed], target]));
    }
    out
}

/// Circuit preparing `amps` (normalized, little-endian) from `|0…0⟩`,
/// including the global phase.
pub fn prepare_amplitudes(amps: &[Complex64]) -> Result<Circuit> {
    let dim = amps.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(
            "amplitude count must be a power of two ≥ 2".into(),
        ));
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > crate::statevector::NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let n = dim.trailing_zeros() as usize;
    let mut circ = Circuit::new(n, 0);
    let mags: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    for t in (0..n).rev() {
        let controls: Vec<usize> = (t + 1..n).collect();
        let groups = 1usize << controls.len();
        let block = 1usize << t;
        let alphas: Vec<f64> = (0..groups)
            .map(|c| {
                let base = c << (t + 1);
                let s0: f64 = mags[base..base + block].iter().sum();
                let s1: f64 = mags[base + block..base + 2 * block].iter().sum();
                2.0 * s1.sqrt().atan2(s0.sqrt())
            })
            .collect();
        if alphas.iter().all(|a| a.abs() < ANGLE_EPS) {
            continue;
        }
        for g in uniformly_controlled_ry(&alphas, &controls, t) {
            circ.push(g)?;
        }
    }
    let phases: Vec<f64> = amps
        .iter()
        .map(|a| if a.norm() > 0.0 { a.arg() } else { 0.0 })
        .collect();
    if phases.iter().any(|p| p.abs() > ANGLE_EPS) {
        circ.push(Gate::new(GateKind::Diag(phases), (0..n).collect()))?;
    }
    Ok(circ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{circuit_unitary, distance_up_to_phase, simulate_statevector};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn unitary_of(gates: &[Gate], n: usize) -> DMatrix<Complex64> {
        let mut c = Circuit::new(n, 0);
        for g in gates {
            c.push(g.clone()).unwrap();
        }
        circuit_unitary(&c).unwrap()
    }

    fn diag_unitary(phases: &[f64], qubits: &[usize], n: usize) -> DMatrix<Complex64> {
        let mut c = Circuit::new(n, 0);
        c.diag(phases.to_vec(), qubits);
        circuit_unitary(&c).unwrap()
    }

    #[test]
    fn parity_phase_both_modes() {
        let qs = [0, 2, 1];
        let theta = 0.37;
        let dim = 16;
        for anc in [None, Some(3)] {
            let u = unitary_of(&parity_phase(&qs, theta, anc), 4);
            for x in 0..8usize {
                let par = ((x & 1) ^ (x >> 1 & 1) ^ (x >> 2 & 1)) as f64;
                let expect = Complex64::from_polar(1.0, theta * par);
                assert!((u[(x, x)] - expect).norm() < 1e-12);
            }
            if anc.is_some() {
                // ancilla returns to |0⟩
                for x in 0..8usize {
                    for y in 8..dim {
                        assert!(u[(y, x)].norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn two_qubit_diag_single_phase() {
        let phases = [0.0, 0.8, 0.0, 0.0];
        let u = unitary_of(&diag_gates(&phases, &[0, 1]).unwrap(), 2);
        assert!(distance_up_to_phase(&u, &diag_unitary(&phases, &[0, 1], 2)) < 1e-10);
    }

    proptest! {
        #[test]
        fn diag_expansion_matches(phases in proptest::collection::vec(-4.0f64..4.0, 8), perm in 0usize..6) {
            let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let qs = orders[perm];
            let u = unitary_of(&diag_gates(&phases, &qs).unwrap(), 3);
            prop_assert!(distance_up_to_phase(&u, &diag_unitary(&phases, &qs, 3)) < 1e-10);
        }

        #[test]
        fn state_prep_reproduces_amplitudes(
            re in proptest::collection::vec(-1.0f64..1.0, 16),
            im in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let raw: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
            let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let amps: Vec<Complex64> = raw.iter().map(|a| a / norm).collect();
            let c = prepare_amplitudes(&amps).unwrap();
            let out = simulate_statevector(&c, None).unwrap();
            for (a, b) in out.amplitudes().iter().zip(&amps) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn state_prep_sparse_and_real() {
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[5] = Complex64::new(1.0, 0.0);
        let c = prepare_amplitudes(&amps).unwrap();
        let out = simulate_statevector(&c, None).unwrap();
        assert!((out.amplitudes()[5] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(c.gates().iter().all(|g| !matches!(g.kind, GateKind::Diag(_))));
        assert!(prepare_amplitudes(&amps[..3]).is_err());
        assert!(prepare_amplitudes(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
    }
}
