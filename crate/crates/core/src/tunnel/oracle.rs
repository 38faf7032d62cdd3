use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::statevector::circuit_unitary;

use super::{Discretization, KineticParams, PotentialSpec, TrotterConfig};

pub const MAX_ORACLE_QUBITS: usize = 6;

/// Dense Trotter product and exact propagator over the working register.
#[derive(Clone, Debug)]
pub struct DenseOracle {
    pub trotter: DMatrix<Complex64>,
    pub exact: DMatrix<Complex64>,
}

/// `F† diag(k̃²s²/2) F` with `F` the DFT matrix `ω^{jk}/√N`.
pub fn kinetic_hamiltonian(disc: &Discretization) -> DMatrix<Complex64> {
    let n = disc.n;
    let dim = disc.sites();
    let params = KineticParams::new(disc);
    let norm = 1.0 / (dim as f64).sqrt();
    let f = DMatrix::from_fn(dim, dim, |j, k| {
        Complex64::from_polar(norm, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64)
    });
    let d = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex64::new(params.energy(r, n), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    f.adjoint() * d * f
}

pub fn potential_hamiltonian(spec: &PotentialSpec) -> DMatrix<Complex64> {
    let prof = spec.profile();
    DMatrix::from_fn(prof.len(), prof.len(), |r, c| {
        Complex64::new(if r == c { prof[r] } else { 0.0 }, 0.0)
    })
}

/// `e^{-iHt}` for Hermitian `H` through its eigendecomposition.
pub fn exact_evolution(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let q = &eig.eigenvectors;
    let phases = DMatrix::from_fn(h.nrows(), h.nrows(), |r, c| {
        if r == c {
            Complex64::from_polar(1.0, -eig.eigenvalues[r] * t)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases * q.adjoint()
}

/// Trotter product for `H = A + B` with `A` applied first in each step.
pub fn trotter_product(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    dt: f64,
    steps: usize,
    order: u8,
) -> Result<DMatrix<Complex64>> {
    let step = match order {
        1 => exact_evolution(b, dt) * exact_evolution(a, dt),
        2 => {
            let half = exact_evolution(b, dt / 2.0);
            &half * exact_evolution(a, dt) * &half
        }
        o => return Err(Error::InvalidArgument(format!("Trotter order {o} not in {{1, 2}}"))),
    };
    let mut u = DMatrix::identity(a.nrows(), a.nrows());
    for _ in 0..steps {
        u = &step * u;
    }
    Ok(u)
}

pub fn dense_oracle(disc: &Discretization, potential: &PotentialSpec, cfg: &TrotterConfig) -> Result<DenseOracle> {
    disc.validate()?;
    cfg.validate()?;
    potential.validate(disc.n)?;
    if disc.n > MAX_ORACLE_QUBITS {
        return Err(Error::TooManyQubits {
            what: "dense oracle",
            max: MAX_ORACLE_QUBITS,
            got: disc.n,
        });
    }
    let k = kinetic_hamiltonian(disc);
    let v = potential_hamiltonian(potential);
    let trotter = trotter_product(&k, &v, cfg.dt, cfg.steps, cfg.order)?;
    let exact = exact_evolution(&(k + v), cfg.dt * cfg.steps as f64);
    Ok(DenseOracle { trotter, exact })
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Block of the circuit unitary acting on the low `n` qubits with every
/// higher (ancilla) qubit in `|0⟩` at input and output.
pub fn working_unitary(circuit: &Circuit, n: usize) -> Result<DMatrix<Complex64>> {
    if n > circuit.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.num_qubits(),
            found: n,
        });
    }
    let u = circuit_unitary(circuit)?;
    let dim = 1usize << n;
    Ok(u.view((0, 0), (dim, dim)).into_owned())
}
