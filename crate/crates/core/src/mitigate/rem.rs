use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::density::ReadoutError;
use crate::error::{Error, Result};
use crate::sampling::CountsDistribution;
use crate::statevector::bitstring;

/// Largest register a dense confusion matrix is built for.
pub const MAX_REM_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemMode {
    /// One calibration circuit per basis state.
    Correlated,
    /// Independent 2×2 matrices per qubit, combined by tensor product.
    Local,
}

/// `matrix[(v, u)] = P(measure v | prepared u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfusionRecord", into = "ConfusionRecord")]
pub struct ConfusionMatrix {
    n: usize,
    mode: RemMode,
    matrix: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConfusionRecord {
    n: usize,
    mode: RemMode,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<ConfusionRecord> for ConfusionMatrix {
    type Error = Error;

    fn try_from(r: ConfusionRecord) -> Result<Self> {
        let dim = r.matrix.len();
        if r.matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidArgument("confusion matrix must be square".into()));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| r.matrix[i][j]);
        ConfusionMatrix::new(r.n, r.mode, m)
    }
}

impl From<ConfusionMatrix> for ConfusionRecord {
    fn from(c: ConfusionMatrix) -> Self {
        let dim = c.matrix.nrows();
        ConfusionRecord {
            n: c.n,
            mode: c.mode,
            matrix: (0..dim).map(|i| (0..dim).map(|j| c.matrix[(i, j)]).collect()).collect(),
        }
    }
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

impl ConfusionMatrix {
    pub fn new(n: usize, mode: RemMode, matrix: DMatrix<f64>) -> Result<Self> {
        if n == 0 || n > MAX_REM_QUBITS {
            return Err(Error::TooManyQubits {
                what: "confusion matrix",
                max: MAX_REM_QUBITS,
                got: n,
            });
        }
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        if matrix.iter().any(|&x| !(-1e-12..=1.0 + 1e-12).contains(&x)) {
            return Err(Error::InvalidArgument("confusion entries must lie in [0, 1]".into()));
        }
        for (u, col) in matrix.column_iter().enumerate() {
            let s: f64 = col.sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("column {u} sums to {s}, not 1")));
            }
        }
        Ok(ConfusionMatrix { n, mode, matrix })
    }

    /// Exact matrix of independent per-qubit readout errors (`errors[q]` for qubit q).
    pub fn from_readout(errors: &[ReadoutError]) -> Result<Self> {
        let mut m = DMatrix::from_element(1, 1, 1.0);
        // qubit 0 is the least significant index, so it goes rightmost
        for e in errors {
            let q = DMatrix::from_fn(2, 2, |v, u| e.matrix()[u][v]);
            m = kron(&q, &m);
        }
        ConfusionMatrix::new(errors.len(), RemMode::Local, m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> RemMode {
        self.mode
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// 2-norm condition number.
    pub fn condition_number(&self) -> f64 {
        let s = self.matrix.clone().svd(false, false).singular_values;
        let max = s.iter().cloned().fold(0.0, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn pseudo_inverse(&self) -> Result<DMatrix<f64>> {
        self.matrix
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Calibration circuit preparing basis state `u` on `n` qubits with X gates.
pub fn calibration_circuit(n: usize, u: usize) -> Result<Circuit> {
    let mut c = Circuit::try_new(n, n)?;
    for q in 0..n {
        if u >> q & 1 == 1 {
            c.x(q);
        }
    }
    c.measure_all();
    Ok(c)
}

/// Runs calibration circuits through `executor(circuit, shots)`. Correlated
/// mode runs all `2^n` basis preparations; local mode runs two per qubit
/// (|0…0⟩ and X on that qubit) and combines the marginal 2×2 matrices.
pub fn build_confusion_matrix<F>(mut executor: F, n: usize, shots: u64, mode: RemMode) -> Result<ConfusionMatrix>
where
    F: FnMut(&Circuit, u64) -> Result<CountsDistribution>,
{
    if shots == 0 {
        return Err(Error::InvalidArgument("calibration needs at least one shot".into()));
    }
    if n == 0 || n > MAX_REM_QUBITS {
        return Err(Error::TooManyQubits {
            what: "confusion matrix",
            max: MAX_REM_QUBITS,
            got: n,
        });
    }
    let mut run = |u: usize| -> Result<CountsDistribution> {
        let counts = executor(&calibration_circuit(n, u)?, shots)?;
        if counts.num_bits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: counts.num_bits(),
            });
        }
        Ok(counts)
    };
    let dim = 1usize << n;
    let matrix = match mode {
        RemMode::Correlated => {
            let mut m = DMatrix::zeros(dim, dim);
            for u in 0..dim {
                let p = run(u)?.probability_vector()?;
                for (v, pv) in p.into_iter().enumerate() {
                    m[(v, u)] = pv;
                }
            }
            m
        }
        RemMode::Local => {
            let mut m = DMatrix::from_element(1, 1, 1.0);
            for q in 0..n {
                let mut mq = DMatrix::zeros(2, 2);
                for (col, u) in [(0, 0), (1, 1usize << q)] {
                    let marg = run(u)?.marginal(&[q])?;
                    mq[(0, col)] = marg.probability("0");
                    mq[(1, col)] = marg.probability("1");
                }
                m = kron(&mq, &m);
            }
            m
        }
    };
    ConfusionMatrix::new(n, mode, matrix)
}

/// Readout-mitigated distribution with its pre-clip diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemResult {
    /// Clipped to be non-negative and renormalized; little-endian index.
    pub probabilities: Vec<f64>,
    /// `pinv(M) p_observed` before clipping.
    pub raw: Vec<f64>,
    /// Total weight of the negative entries removed by clipping.
    pub clipped_mass: f64,
    /// `‖M raw − p_observed‖₂`.
    pub residual: f64,
}

impl RemResult {
    pub fn as_map(&self) -> BTreeMap<String, f64> {
        let n = self.probabilities.len().trailing_zeros() as usize;
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, &p)| (bitstring(k, n), p))
            .collect()
    }

    pub fn probability(&self, key: &str) -> Result<f64> {
        let k = crate::statevector::parse_bitstring(key)?;
        self.probabilities
            .get(k)
            .copied()
            .ok_or_else(|| Error::MalformedBitstring(key.to_string()))
    }
}

/// Applies the pseudoinverse of `m` to a dense probability vector.
pub fn apply_rem_probabilities(m: &ConfusionMatrix, observed: &[f64]) -> Result<RemResult> {
    let dim = m.matrix.nrows();
    if observed.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: observed.len(),
        });
    }
    let p = DVector::from_column_slice(observed);
    let raw = m.pseudo_inverse()? * &p;
    let residual = (&m.matrix * &raw - &p).norm();
    let clipped_mass: f64 = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    let mut probabilities: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = probabilities.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "mitigated distribution has no positive mass".into(),
        ));
    }
    probabilities.iter_mut().for_each(|x| *x /= total);
    Ok(RemResult {
        probabilities,
        raw: raw.iter().copied().collect(),
        clipped_mass,
        residual,
    })
}

/// `pinv(M)` applied to the empirical distribution of `counts`, clipped and
/// renormalized.
pub fn apply_rem(m: &ConfusionMatrix, counts: &CountsDistribution) -> Result<RemResult> {
    if counts.num_bits() != m.n {
        return Err(Error::DimensionMismatch {
            expected: m.n,
            found: counts.num_bits(),
        });
    }
    apply_rem_probabilities(m, &counts.probability_vector()?)
}
