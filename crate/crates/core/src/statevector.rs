//! Ideal statevector simulation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};

/// Normalization tolerance for states handed to the simulator.
pub const NORM_TOL: f64 = 1e-10;

/// Amplitudes of an `n`-qubit pure state, little-endian (qubit 0 is the least
/// significant bit of the basis index).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        assert!(index < 1 << n, "basis index out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    /// Wraps amplitudes, checking the length is a power of two and the norm is one.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector {
            n: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born probabilities per basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> StateVector {
        StateVector {
            n: self.n,
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies one unitary gate in place.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if gate.qubits.iter().any(|&q| q >= self.n) {
            return Err(Error::InvalidCircuit(format!(
                "{} exceeds the {}-qubit state",
                gate.kind.name(),
                self.n
            )));
        }
        apply_gate_raw(&mut self.amps, gate)
    }
}

/// Applies a gate to a raw amplitude buffer of any power-of-two length.
pub(crate) fn apply_gate_raw(amps: &mut [Complex64], gate: &Gate) -> Result<()> {
    match &gate.kind {
        GateKind::Measure(_) => Err(Error::MeasurementPresent),
        GateKind::Diag(phases) => {
            let factors: Vec<Complex64> = phases.iter().map(|p| Complex64::from_polar(1.0, *p)).collect();
            apply_diagonal(amps, &gate.qubits, &factors);
            Ok(())
        }
        GateKind::RZ(_) | GateKind::P(_) | GateKind::CZ | GateKind::CP(_) => {
            let m = gate.matrix().expect("unitary gate");
            let dim = 1 << gate.qubits.len();
            let d: Vec<Complex64> = (0..dim).map(|i| m[i * dim + i]).collect();
            apply_diagonal(amps, &gate.qubits, &d);
            Ok(())
        }
        _ => {
            let m = gate.matrix().expect("unitary gate");
            apply_matrix(amps, &gate.qubits, &m);
            Ok(())
        }
    }
}

/// Applies a dense `2^k × 2^k` row-major matrix on `qubits`.
pub(crate) fn apply_matrix(amps: &mut [Complex64], qubits: &[usize], m: &[Complex64]) {
    let k = qubits.len();
    let dim = 1usize << k;
    debug_assert_eq!(m.len(), dim * dim);
    if k == 1 {
        let bit = 1usize << qubits[0];
        let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
        for i in 0..amps.len() {
            if i & bit == 0 {
                let a0 = amps[i];
                let a1 = amps[i | bit];
                amps[i] = m00 * a0 + m01 * a1;
                amps[i | bit] = m10 * a0 + m11 * a1;
            }
        }
        return;
    }
    let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|i| {
            qubits
                .iter()
                .enumerate()
                .filter(|(j, _)| i >> j & 1 == 1)
                .map(|(_, q)| 1usize << q)
                .sum()
        })
        .collect();
    let mut local = vec![Complex64::new(0.0, 0.0); dim];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, off) in local.iter_mut().zip(&offsets) {
            *l = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let row = &m[r * dim..(r + 1) * dim];
            amps[base | off] = row.iter().zip(&local).map(|(a, b)| a * b).sum();
        }
    }
}

/// Multiplies each amplitude by the factor of its local index over `qubits`.
pub(crate) fn apply_diagonal(amps: &mut [Complex64], qubits: &[usize], factors: &[Complex64]) {
    for (i, a) in amps.iter_mut().enumerate() {
        let local = qubits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &q)| acc | ((i >> q & 1) << j));
        *a *= factors[local];
    }
}

/// Runs a measurement-free circuit on `initial` (default `|0…0⟩`).
pub fn simulate_statevector(circuit: &Circuit, initial: Option<&StateVector>) -> Result<StateVector> {
    if circuit.has_measurements() {
        return Err(Error::MeasurementPresent);
    }
    let mut state = match initial {
        Some(s) => {
            if s.n != circuit.num_qubits() {
                return Err(Error::DimensionMismatch {
                    expected: circuit.num_qubits(),
                    found: s.n,
                });
            }
            let norm = s.norm_sqr();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized(norm));
            }
            s.clone()
        }
        None => StateVector::zero(circuit.num_qubits()),
    };
    for g in circuit.gates() {
        apply_gate_raw(&mut state.amps, g)?;
    }
    Ok(state)
}

/// Full unitary of a measurement-free circuit (column `j` is the image of `|j⟩`).
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    const MAX: usize = 12;
    let n = circuit.num_qubits();
    if n > MAX {
        return Err(Error::TooManyQubits {
            what: "unitary construction",
            max: MAX,
            got: n,
        });
    }
    let dim = 1 << n;
    let mut u = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let out = simulate_statevector(circuit, Some(&StateVector::basis(n, j)))?;
        for (i, a) in out.amps.iter().enumerate() {
            u[(i, j)] = *a;
        }
    }
    Ok(u)
}

/// Max-norm distance between two matrices after removing the best global phase.
pub fn distance_up_to_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

/// Renders basis index `k` as an `n`-character bitstring, most significant qubit first.
pub fn bitstring(k: usize, n: usize) -> String {
    (0..n).rev().map(|q| if k >> q & 1 == 1 { '1' } else { '0' }).collect()
}

/// Parses a bitstring rendered by [`bitstring`].
pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > usize::BITS as usize - 1 {
        return Err(Error::MalformedBitstring(s.to_string()));
    }
    s.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(Error::MalformedBitstring(s.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hadamard_on_zero() {
        let mut circ = Circuit::new(1, 0);
        circ.h(0);
        let s = simulate_statevector(&circ, None).unwrap();
        assert!((s.amplitudes()[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let psi = StateVector::from_amplitudes(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let out = simulate_statevector(&Circuit::new(1, 0), Some(&psi)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn cx_little_endian_truth_table() {
        // (|00⟩ + |10⟩)/√2 has qubit 1 in superposition; CX(0 → 1) leaves it,
        // and (|00⟩+|01⟩)/√2 (qubit 0 set) maps to (|00⟩+|11⟩)/√2.
        let h = FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        let mut circ = Circuit::new(2, 0);
        circ.cx(0, 1);
        let psi = StateVector::from_amplitudes(vec![c(h, 0.0), c(h, 0.0), z, z]).unwrap();
        let out = simulate_statevector(&circ, Some(&psi)).unwrap();
        let expect = [c(h, 0.0), z, z, c(h, 0.0)];
        for (a, b) in out.amplitudes().iter().zip(expect) {
            assert!((a - b).norm() < 1e-15);
        }
        // bitstring "10" is index 2: control qubit 0 is 0, so CX does nothing
        let psi = StateVector::from_amplitudes(vec![c(h, 0.0), z, c(h, 0.0), z]).unwrap();
        let out = simulate_statevector(&circ, Some(&psi)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn simulate_errors() {
        let mut m = Circuit::new(1, 1);
        m.measure(0, 0);
        assert!(matches!(simulate_statevector(&m, None), Err(Error::MeasurementPresent)));
        let two = StateVector::zero(2);
        assert!(simulate_statevector(&Circuit::new(1, 0), Some(&two)).is_err());
        let bad = StateVector {
            n: 1,
            amps: vec![c(1.0, 0.0), c(1.0, 0.0)],
        };
        assert!(matches!(
            simulate_statevector(&Circuit::new(1, 0), Some(&bad)),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn bitstrings() {
        assert_eq!(bitstring(4, 4), "0100");
        assert_eq!(parse_bitstring("0100").unwrap(), 4);
        assert!(parse_bitstring("01a").is_err());
        assert!(parse_bitstring("").is_err());
    }
}
