//! Noisy density-matrix simulation and partial trace.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::statevector::{apply_gate_raw, StateVector};

/// Largest register accepted by the density simulator (4^10 complex entries).
pub const MAX_DENSITY_QUBITS: usize = 10;

/// A `2^n × 2^n` density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        let dim = a.len();
        let rho = DMatrix::from_fn(dim, dim, |r, c| a[r] * a[c].conj());
        DensityMatrix {
            n: state.num_qubits(),
            rho,
        }
    }

    /// Wraps a matrix, checking that it is a valid density matrix within `tol`.
    pub fn from_matrix(rho: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let dim = rho.nrows();
        if dim == 0 || !dim.is_power_of_two() || rho.ncols() != dim {
            return Err(Error::InvalidArgument(
                "density matrix must be square with power-of-two size".into(),
            ));
        }
        let dm = DensityMatrix {
            n: dim.trailing_zeros() as usize,
            rho,
        };
        dm.check(tol)?;
        Ok(dm)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        DensityMatrix {
            n,
            rho: DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Diagonal (Born probabilities), clamped at zero against round-off.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re.max(0.0)).collect()
    }

    /// `self ⊗ other`, where `other` occupies the low (least significant) qubits.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n: self.n + other.n,
            rho: self.rho.kronecker(&other.rho),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermiticity, unit trace and positive semidefiniteness.
    pub fn check(&self, tol: f64) -> Result<()> {
        let herm = (&self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > tol {
            return Err(Error::InvalidArgument(format!(
                "density matrix not Hermitian ({herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} != 1")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidArgument(format!("density matrix has eigenvalue {min}")));
        }
        Ok(())
    }

    /// `ρ → UρU†` for one gate.
    pub fn apply_unitary(&mut self, gate: &Gate) -> Result<()> {
        if gate.qubits.iter().any(|&q| q >= self.n) {
            return Err(Error::InvalidCircuit(format!(
                "{} exceeds the register",
                gate.kind.name()
            )));
        }
        // Column-major storage: the flat index is `c·dim + r`, i.e. a 2n-qubit
        // vector whose low n bits index the row and high n bits the column.
        let buf = self.rho.as_mut_slice();
        apply_gate_raw(buf, gate)?;
        let conj = gate.conjugate().ok_or(Error::MeasurementPresent)?;
        let shifted = Gate::new(conj.kind, conj.qubits.iter().map(|q| q + self.n).collect());
        apply_gate_raw(buf, &shifted)
    }

    /// Depolarizing channel on `qubits`: `ρ → (1-p)ρ + p·(I/2^k ⊗ Tr_S ρ)`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p <= 0.0 {
            return;
        }
        let p = p.min(1.0);
        let n = self.n;
        let dim = 1usize << n;
        let k = qubits.len();
        let sub = 1usize << k;
        let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
        let offsets: Vec<usize> = (0..sub)
            .map(|i| {
                qubits
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| i >> j & 1 == 1)
                    .map(|(_, q)| 1usize << q)
                    .sum()
            })
            .collect();
        let buf = self.rho.as_mut_slice();
        let keep = 1.0 - p;
        let mix = p / sub as f64;
        for c in (0..dim).filter(|c| c & mask == 0) {
            for r in (0..dim).filter(|r| r & mask == 0) {
                let tr: Complex64 = offsets.iter().map(|o| buf[(c | o) * dim + (r | o)]).sum();
                for o2 in &offsets {
                    for o1 in &offsets {
                        let idx = (c | o2) * dim + (r | o1);
                        buf[idx] *= keep;
                        if o1 == o2 {
                            buf[idx] += tr * mix;
                        }
                    }
                }
            }
        }
    }
}

/// Per-qubit readout confusion: `matrix[prepared][measured]`, rows sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct ReadoutError {
    /// P(read 1 | prepared 0)
    pub p01: f64,
    /// P(read 0 | prepared 1)
    pub p10: f64,
}

impl ReadoutError {
    pub const PERFECT: ReadoutError = ReadoutError { p01: 0.0, p10: 0.0 };

    pub fn symmetric(p: f64) -> Self {
        ReadoutError { p01: p, p10: p }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.p01, self.p01], [self.p10, 1.0 - self.p10]]
    }

    pub fn is_perfect(&self) -> bool {
        self.p01 == 0.0 && self.p10 == 0.0
    }
}

impl TryFrom<[[f64; 2]; 2]> for ReadoutError {
    type Error = Error;

    fn try_from(m: [[f64; 2]; 2]) -> Result<Self> {
        for row in &m {
            if row.iter().any(|x| !(0.0..=1.0).contains(x)) || (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "readout row {row:?} is not a distribution"
                )));
            }
        }
        Ok(ReadoutError {
            p01: m[0][1],
            p10: m[1][0],
        })
    }
}

impl From<ReadoutError> for [[f64; 2]; 2] {
    fn from(r: ReadoutError) -> Self {
        r.matrix()
    }
}

/// Depolarizing gate noise plus per-qubit readout confusion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each one-qubit gate.
    #[serde(default)]
    pub p1: f64,
    /// Depolarizing probability after each multi-qubit gate.
    #[serde(default)]
    pub p2: f64,
    /// Readout confusion per qubit; qubits beyond the list read out perfectly.
    #[serde(default)]
    pub readout: Vec<ReadoutError>,
    /// Abstract noise level τ multiplying `p1` and `p2`.
    #[serde(default = "one")]
    pub base_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            readout: Vec::new(),
            base_scale: 1.0,
        }
    }

    pub fn depolarizing(p1: f64, p2: f64) -> Self {
        NoiseModel {
            p1,
            p2,
            ..NoiseModel::noiseless()
        }
    }

    pub fn with_readout(mut self, readout: Vec<ReadoutError>) -> Self {
        self.readout = readout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |x: f64| (0.0..=1.0).contains(&x);
        if !prob(self.p1) || !prob(self.p2) {
            return Err(Error::InvalidArgument(
                "depolarizing probabilities must lie in [0, 1]".into(),
            ));
        }
        if !(self.base_scale.is_finite() && self.base_scale > 0.0) {
            return Err(Error::InvalidArgument("base_scale must be positive".into()));
        }
        if self.readout.iter().any(|r| !prob(r.p01) || !prob(r.p10)) {
            return Err(Error::InvalidArgument(
                "readout probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Effective depolarizing probability for a gate of `arity` at noise scale `scale`.
    pub fn gate_probability(&self, arity: usize, scale: f64) -> f64 {
        let p = if arity <= 1 { self.p1 } else { self.p2 };
        (scale * self.base_scale * p).clamp(0.0, 1.0)
    }

    pub fn readout_for(&self, qubit: usize) -> ReadoutError {
        self.readout.get(qubit).copied().unwrap_or(ReadoutError::PERFECT)
    }

    pub fn is_noiseless_gates(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }
}

/// Runs `circuit` from `|0…0⟩` applying every gate followed by depolarizing
/// noise on its support with probability `min(1, scale·τ·p_k)`.
pub fn simulate_density(circuit: &Circuit, noise: &NoiseModel, scale: f64) -> Result<DensityMatrix> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise scale {scale} must be non-negative"
        )));
    }
    noise.validate()?;
    let n = circuit.num_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::TooManyQubits {
            what: "density simulation",
            max: MAX_DENSITY_QUBITS,
            got: n,
        });
    }
    if circuit.has_measurements() {
        return Err(Error::MeasurementPresent);
    }
    let mut rho = DensityMatrix::from_pure(&StateVector::zero(n));
    for g in circuit.gates() {
        rho.apply_unitary(g)?;
        let p = noise.gate_probability(g.qubits.len(), scale);
        rho.depolarize(&g.qubits, p);
    }
    Ok(rho)
}

/// Reduced density matrix over `keep`; output qubit `j` is input qubit `keep[j]`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep list is empty".into()));
    }
    for (i, q) in keep.iter().enumerate() {
        if *q >= rho.n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
        }
        if keep[..i].contains(q) {
            return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
        }
    }
    let traced: Vec<usize> = (0..rho.n).filter(|q| !keep.contains(q)).collect();
    let spread = |local: usize, qubits: &[usize]| -> usize {
        qubits
            .iter()
            .enumerate()
            .filter(|(j, _)| local >> j & 1 == 1)
            .map(|(_, q)| 1usize << q)
            .sum()
    };
    let kd = 1usize << keep.len();
    let td = 1usize << traced.len();
    let keep_off: Vec<usize> = (0..kd).map(|a| spread(a, keep)).collect();
    let trace_off: Vec<usize> = (0..td).map(|e| spread(e, &traced)).collect();
    let out = DMatrix::from_fn(kd, kd, |a, b| {
        trace_off
            .iter()
            .map(|e| rho.rho[(keep_off[a] | e, keep_off[b] | e)])
            .sum()
    });
    Ok(DensityMatrix {
        n: keep.len(),
        rho: out,
    })
}
