//! Gate kinds of the circuit IR and their unitary matrices.
//!
//! Multi-qubit matrices use a local little-endian index: for a gate acting on
//! `qubits = [q0, q1, ...]`, local basis index `i` has bit `j` equal to the
//! state of `qubits[j]`. So for `CX` on `[control, target]` the control is the
//! least significant local bit.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The enumerated gate kinds. Angles are in radians.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    SX,
    /// Inverse of `SX`; needed so that folding and conjugation of `SX` stay single gates.
    SXdg,
    H,
    RY(f64),
    RZ(f64),
    /// Phase gate `diag(1, e^{iθ})`.
    P(f64),
    CX,
    CZ,
    CP(f64),
    Swap,
    CCX,
    CSwap,
    /// Controlled `e^{iγ} U(θ, φ, λ)` with `U = [[cos θ/2, -e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
    CU {
        theta: f64,
        phi: f64,
        lambda: f64,
        gamma: f64,
    },
    /// Diagonal gate, one phase per local basis state.
    Diag(Vec<f64>),
    /// Composite quantum Fourier transform block over its qubits.
    Qft,
    /// Composite inverse quantum Fourier transform block.
    Iqft,
    /// Terminal measurement into the given classical bit.
    Measure(usize),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::SX => "sx",
            GateKind::SXdg => "sxdg",
            GateKind::H => "h",
            GateKind::RY(_) => "ry",
            GateKind::RZ(_) => "rz",
            GateKind::P(_) => "p",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
            GateKind::CP(_) => "cp",
            GateKind::Swap => "swap",
            GateKind::CCX => "ccx",
            GateKind::CSwap => "cswap",
            GateKind::CU { .. } => "cu",
            GateKind::Diag(_) => "diag",
            GateKind::Qft => "qft",
            GateKind::Iqft => "iqft",
            GateKind::Measure(_) => "measure",
        }
    }

    /// Fixed arity, or `None` for variable-width kinds (`Diag`, `Qft`, `Iqft`).
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::X
            | GateKind::SX
            | GateKind::SXdg
            | GateKind::H
            | GateKind::RY(_)
            | GateKind::RZ(_)
            | GateKind::P(_)
            | GateKind::Measure(_) => Some(1),
            GateKind::CX | GateKind::CZ | GateKind::CP(_) | GateKind::Swap | GateKind::CU { .. } => Some(2),
            GateKind::CCX | GateKind::CSwap => Some(3),
            GateKind::Diag(_) | GateKind::Qft | GateKind::Iqft => None,
        }
    }

    /// Real parameters in canonical order (empty for `Diag`, whose data lives in its phases).
    pub fn params(&self) -> Vec<f64> {
        match self {
            GateKind::RY(t) | GateKind::RZ(t) | GateKind::P(t) | GateKind::CP(t) => vec![*t],
            GateKind::CU {
                theta,
                phi,
                lambda,
                gamma,
            } => vec![*theta, *phi, *lambda, *gamma],
            _ => Vec::new(),
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Measure(_))
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(
            self,
            GateKind::RZ(_) | GateKind::P(_) | GateKind::CZ | GateKind::CP(_) | GateKind::Diag(_)
        )
    }

    /// Rebuild a kind from its serialized name and parameters.
    pub fn from_parts(name: &str, params: &[f64], phases: Option<&[f64]>, clbit: Option<usize>) -> Result<Self> {
        let expect = |n: usize| -> Result<()> {
            if params.len() != n {
                return Err(Error::InvalidGate(format!(
                    "{name} expects {n} parameter(s), got {}",
                    params.len()
                )));
            }
            Ok(())
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "x" => GateKind::X,
            "sx" => GateKind::SX,
            "sxdg" => GateKind::SXdg,
            "h" => GateKind::H,
            "ry" => {
                expect(1)?;
                GateKind::RY(params[0])
            }
            "rz" => {
                expect(1)?;
                GateKind::RZ(params[0])
            }
            "p" => {
                expect(1)?;
                GateKind::P(params[0])
            }
            "cx" => GateKind::CX,
            "cz" => GateKind::CZ,
            "cp" => {
                expect(1)?;
                GateKind::CP(params[0])
            }
            "swap" => GateKind::Swap,
            "ccx" => GateKind::CCX,
            "cswap" => GateKind::CSwap,
            "cu" => {
                expect(4)?;
                GateKind::CU {
                    theta: params[0],
                    phi: params[1],
                    lambda: params[2],
                    gamma: params[3],
                }
            }
            "diag" => {
                let phases = phases.ok_or_else(|| Error::InvalidGate("diag requires phases".into()))?;
                GateKind::Diag(phases.to_vec())
            }
            "qft" => GateKind::Qft,
            "iqft" => GateKind::Iqft,
            "measure" => {
                let c = clbit.ok_or_else(|| Error::InvalidGate("measure requires a clbit".into()))?;
                GateKind::Measure(c)
            }
            other => return Err(Error::InvalidGate(format!("unknown gate name {other:?}"))),
        };
        if !matches!(
            kind,
            GateKind::RY(_) | GateKind::RZ(_) | GateKind::P(_) | GateKind::CP(_) | GateKind::CU { .. }
        ) && !params.is_empty()
        {
            return Err(Error::InvalidGate(format!("{name} takes no parameters")));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGate(format!("{name} has a non-finite parameter")));
        }
        Ok(kind)
    }
}

/// A gate applied to an ordered list of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Gate { kind, qubits }
    }

    /// Checks kind/arity consistency and distinct qubits.
    pub fn validate(&self) -> Result<()> {
        let k = self.qubits.len();
        if k == 0 {
            return Err(Error::InvalidGate(format!("{} acts on no qubits", self.kind.name())));
        }
        if let Some(a) = self.kind.arity() {
            if a != k {
                return Err(Error::InvalidGate(format!(
                    "{} expects {a} qubit(s), got {k}",
                    self.kind.name()
                )));
            }
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(Error::InvalidGate(format!(
                    "{} has repeated qubit {q}",
                    self.kind.name()
                )));
            }
        }
        match &self.kind {
            GateKind::Diag(phases) => {
                if phases.len() != 1 << k {
                    return Err(Error::InvalidGate(format!(
                        "diag on {k} qubit(s) needs {} phases, got {}",
                        1usize << k,
                        phases.len()
                    )));
                }
                if phases.iter().any(|p| !p.is_finite()) {
                    return Err(Error::InvalidGate("diag has a non-finite phase".into()));
                }
            }
            kind => {
                if kind.params().iter().any(|p| !p.is_finite()) {
                    return Err(Error::InvalidGate(format!(
                        "{} has a non-finite parameter",
                        kind.name()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_unitary(&self) -> bool {
        self.kind.is_unitary()
    }

    /// The inverse gate (`None` for measurements).
    pub fn inverse(&self) -> Option<Gate> {
        use GateKind::*;
        let kind = match &self.kind {
            X => X,
            SX => SXdg,
            SXdg => SX,
            H => H,
            RY(t) => RY(-t),
            RZ(t) => RZ(-t),
            P(t) => P(-t),
            CX => CX,
            CZ => CZ,
            CP(t) => CP(-t),
            Swap => Swap,
            CCX => CCX,
            CSwap => CSwap,
            CU {
                theta,
                phi,
                lambda,
                gamma,
            } => CU {
                theta: -theta,
                phi: -lambda,
                lambda: -phi,
                gamma: -gamma,
            },
            Diag(p) => Diag(p.iter().map(|x| -x).collect()),
            Qft => Iqft,
            Iqft => Qft,
            Measure(_) => return None,
        };
        Some(Gate::new(kind, self.qubits.clone()))
    }

    /// The gate whose matrix is the elementwise complex conjugate of this one.
    pub fn conjugate(&self) -> Option<Gate> {
        use GateKind::*;
        let kind = match &self.kind {
            X => X,
            // conj(SX) = SX† exactly
            SX => SXdg,
            SXdg => SX,
            H => H,
            RY(t) => RY(*t),
            RZ(t) => RZ(-t),
            P(t) => P(-t),
            CX => CX,
            CZ => CZ,
            CP(t) => CP(-t),
            Swap => Swap,
            CCX => CCX,
            CSwap => CSwap,
            CU {
                theta,
                phi,
                lambda,
                gamma,
            } => CU {
                theta: *theta,
                phi: -phi,
                lambda: -lambda,
                gamma: -gamma,
            },
            Diag(p) => Diag(p.iter().map(|x| -x).collect()),
            Qft => Iqft,
            Iqft => Qft,
            Measure(_) => return None,
        };
        Some(Gate::new(kind, self.qubits.clone()))
    }

    /// Dense row-major matrix of dimension `2^k` in the local index convention.
    /// `None` for measurements.
    pub fn matrix(&self) -> Option<Vec<Complex64>> {
        let k = self.qubits.len();
        let dim = 1usize << k;
        let m = match &self.kind {
            GateKind::Measure(_) => return None,
            GateKind::Diag(phases) => {
                let mut m = vec![ZERO; dim * dim];
                for (i, ph) in phases.iter().enumerate() {
                    m[i * dim + i] = Complex64::from_polar(1.0, *ph);
                }
                m
            }
            GateKind::Qft | GateKind::Iqft => {
                let sign = if self.kind == GateKind::Qft { 1.0 } else { -1.0 };
                let norm = 1.0 / (dim as f64).sqrt();
                let mut m = vec![ZERO; dim * dim];
                for r in 0..dim {
                    for c in 0..dim {
                        let ang = sign * 2.0 * PI * ((r * c) % dim) as f64 / dim as f64;
                        m[r * dim + c] = Complex64::from_polar(norm, ang);
                    }
                }
                m
            }
            kind => fixed_matrix(kind),
        };
        Some(m)
    }
}

/// Single-qubit `U(θ, φ, λ)`.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> [Complex64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        -Complex64::from_polar(s, lambda),
        Complex64::from_polar(s, phi),
        Complex64::from_polar(c, phi + lambda),
    ]
}

fn fixed_matrix(kind: &GateKind) -> Vec<Complex64> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let h = FRAC_1_SQRT_2;
    match kind {
        GateKind::X => vec![ZERO, ONE, ONE, ZERO],
        GateKind::SX => {
            let a = Complex64::new(0.5, 0.5);
            let b = Complex64::new(0.5, -0.5);
            vec![a, b, b, a]
        }
        GateKind::SXdg => {
            let a = Complex64::new(0.5, -0.5);
            let b = Complex64::new(0.5, 0.5);
            vec![a, b, b, a]
        }
        GateKind::H => vec![r(h), r(h), r(h), r(-h)],
        GateKind::RY(t) => {
            let (s, c) = (t / 2.0).sin_cos();
            vec![r(c), r(-s), r(s), r(c)]
        }
        GateKind::RZ(t) => vec![
            Complex64::from_polar(1.0, -t / 2.0),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, t / 2.0),
        ],
        GateKind::P(t) => vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, *t)],
        GateKind::CX => permutation(4, &[0, 3, 2, 1]),
        GateKind::Swap => permutation(4, &[0, 2, 1, 3]),
        GateKind::CCX => permutation(8, &[0, 1, 2, 7, 4, 5, 6, 3]),
        GateKind::CSwap => permutation(8, &[0, 1, 2, 5, 4, 3, 6, 7]),
        GateKind::CZ => diagonal(&[ONE, ONE, ONE, -ONE]),
        GateKind::CP(t) => diagonal(&[ONE, ONE, ONE, Complex64::from_polar(1.0, *t)]),
        GateKind::CU {
            theta,
            phi,
            lambda,
            gamma,
        } => {
            let u = u_matrix(*theta, *phi, *lambda);
            let g = Complex64::from_polar(1.0, *gamma);
            let mut m = vec![ZERO; 16];
            m[0] = ONE;
            m[2 * 4 + 2] = ONE;
            // control set: local indices 1 (target 0) and 3 (target 1)
            m[4 + 1] = g * u[0];
            m[4 + 3] = g * u[1];
            m[3 * 4 + 1] = g * u[2];
            m[3 * 4 + 3] = g * u[3];
            m
        }
        GateKind::Diag(_) | GateKind::Qft | GateKind::Iqft | GateKind::Measure(_) => {
            unreachable!("variable-size kinds handled by Gate::matrix")
        }
    }
}

/// Matrix with `m[perm[c]][c] = 1`.
fn permutation(dim: usize, perm: &[usize]) -> Vec<Complex64> {
    let mut m = vec![ZERO; dim * dim];
    for (c, &r) in perm.iter().enumerate() {
        m[r * dim + c] = ONE;
    }
    m
}

fn diagonal(d: &[Complex64]) -> Vec<Complex64> {
    let dim = d.len();
    let mut m = vec![ZERO; dim * dim];
    for (i, v) in d.iter().enumerate() {
        m[i * dim + i] = *v;
    }
    m
}
