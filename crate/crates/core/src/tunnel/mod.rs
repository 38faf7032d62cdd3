//! Trotterized evolution of a particle on a periodic 1-D grid.
//!
//! Units are natural (`ħ = m = 1`). Position index `k` lives on `n` qubits,
//! little-endian, at `x_k = origin + k·Δl`.

mod evolution;
mod kinetic;
mod oracle;
mod potential;
mod qft;
mod state;
mod timeline;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use evolution::{build_evolution_circuit, build_trotter_steps};
pub use kinetic::build_kinetic;
pub use oracle::{
    dense_oracle, exact_evolution, kinetic_hamiltonian, operator_norm, potential_hamiltonian, trotter_product,
    working_unitary, DenseOracle, MAX_ORACLE_QUBITS,
};
pub use potential::build_potential;
pub use qft::build_qft;
pub use state::{initial_state_circuit, prepare_initial_state};
pub use timeline::{run_timeline, TimelineMode, TimelineResult};

/// Periodic grid of `2^n` sites over a box of length `length`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    /// Position of site 0.
    #[serde(default)]
    pub origin: f64,
}

impl Discretization {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        let d = Discretization { n, length, origin: 0.0 };
        d.validate()?;
        Ok(d)
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 24 {
            return Err(Error::InvalidArgument(format!(
                "qubit count {} out of range 1..=24",
                self.n
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "box length {} must be positive",
                self.length
            )));
        }
        if !self.origin.is_finite() {
            return Err(Error::InvalidArgument("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        1 << self.n
    }

    pub fn dx(&self) -> f64 {
        self.length / self.sites() as f64
    }

    pub fn position(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.dx()
    }
}

/// How a potential is realized in gates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialForm {
    /// Exact phase on the matched states via (multi-)parity phases.
    #[default]
    Pattern,
    /// `RZ` on qubit 0; pattern must be `x…x1`.
    SingleZLow,
    /// `RZ` on qubit `n-1`; pattern must be `1x…x`.
    SingleZHigh,
}

/// Potential of height `v` on the basis states matching `pattern`.
///
/// Character 0 of the pattern is qubit `n-1`, so `"x1"` marks the states
/// whose qubit 0 is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub pattern: String,
    pub v: f64,
    #[serde(default)]
    pub form: PotentialForm,
}

impl PotentialSpec {
    pub fn new(pattern: &str, v: f64) -> Self {
        PotentialSpec {
            pattern: pattern.to_string(),
            v,
            form: PotentialForm::Pattern,
        }
    }

    pub fn with_form(mut self, form: PotentialForm) -> Self {
        self.form = form;
        self
    }

    pub fn none(n: usize) -> Self {
        PotentialSpec::new(&"x".repeat(n), 0.0)
    }

    pub fn num_qubits(&self) -> usize {
        self.pattern.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.pattern.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.pattern.len(),
            });
        }
        if let Some(c) = self.pattern.chars().find(|c| !matches!(c, '0' | '1' | 'x')) {
            return Err(Error::InvalidArgument(format!(
                "pattern character {c:?} not in {{0,1,x}}"
            )));
        }
        if !self.v.is_finite() {
            return Err(Error::InvalidArgument("potential strength must be finite".into()));
        }
        let fixed = self.fixed_bits();
        let ok = match self.form {
            PotentialForm::Pattern => true,
            PotentialForm::SingleZLow => fixed == [(0, true)],
            PotentialForm::SingleZHigh => fixed == [(n - 1, true)],
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "pattern {} does not fit form {:?}",
                self.pattern, self.form
            )));
        }
        Ok(())
    }

    /// `(qubit, required value)` for every non-`x` character, ascending qubit.
    pub fn fixed_bits(&self) -> Vec<(usize, bool)> {
        let n = self.pattern.len();
        let mut out: Vec<(usize, bool)> = self
            .pattern
            .chars()
            .enumerate()
            .filter(|(_, c)| *c != 'x')
            .map(|(i, c)| (n - 1 - i, c == '1'))
            .collect();
        out.sort();
        out
    }

    pub fn matches(&self, k: usize) -> bool {
        self.fixed_bits().iter().all(|&(q, b)| (k >> q & 1 == 1) == b)
    }

    /// Potential value per site.
    pub fn profile(&self) -> Vec<f64> {
        let fixed = self.fixed_bits();
        (0..1usize << self.pattern.len())
            .map(|k| {
                if fixed.iter().all(|&(q, b)| (k >> q & 1 == 1) == b) {
                    self.v
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Initial wavefunction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WavepacketSpec {
    Basis {
        k: usize,
    },
    /// `e^{-½(d/σ)²}·e^{ip·x}` with `d` the periodic distance to `mu`, renormalized.
    Gaussian {
        mu: f64,
        sigma: f64,
        p: f64,
    },
}

/// Time step, step count, Trotter order and kinetic-operator scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterConfig {
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default)]
    pub use_ancilla: bool,
    /// Use the literal single-angle/pair-angle kinetic coefficients instead of
    /// the exact expansion. Only meaningful with `use_ancilla`.
    #[serde(default)]
    pub paper_faithful: bool,
}

fn default_order() -> u8 {
    1
}

impl TrotterConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        TrotterConfig {
            dt,
            steps,
            order: 1,
            use_ancilla: false,
            paper_faithful: false,
        }
    }

    pub fn order(mut self, order: u8) -> Self {
        self.order = order;
        self
    }

    pub fn ancilla(mut self, use_ancilla: bool) -> Self {
        self.use_ancilla = use_ancilla;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step {} must be positive",
                self.dt
            )));
        }
        if !matches!(self.order, 1 | 2) {
            return Err(Error::InvalidArgument(format!(
                "Trotter order {} not in {{1, 2}}",
                self.order
            )));
        }
        if self.paper_faithful && !self.use_ancilla {
            return Err(Error::InvalidArgument(
                "paper_faithful kinetic needs use_ancilla".into(),
            ));
        }
        Ok(())
    }

    /// Width of the evolution circuit for an `n`-qubit register.
    pub fn width(&self, n: usize) -> usize {
        n + usize::from(self.use_ancilla)
    }
}

/// Momentum grid of the kinetic term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticParams {
    /// `2π/L`.
    pub momentum_scale: f64,
    #[serde(default)]
    pub paper_faithful: bool,
}

impl KineticParams {
    pub fn new(disc: &Discretization) -> Self {
        KineticParams {
            momentum_scale: 2.0 * PI / disc.length,
            paper_faithful: false,
        }
    }

    pub fn paper_faithful(mut self, on: bool) -> Self {
        self.paper_faithful = on;
        self
    }

    /// Two's-complement folded index: `k` below `2^(n-1)`, else `k - 2^n`.
    pub fn centered(k: usize, n: usize) -> i64 {
        let half = 1i64 << (n - 1);
        let k = k as i64;
        if k < half {
            k
        } else {
            k - (1i64 << n)
        }
    }

    pub fn momentum(&self, k: usize, n: usize) -> f64 {
        self.momentum_scale * Self::centered(k, n) as f64
    }

    pub fn energy(&self, k: usize, n: usize) -> f64 {
        let p = self.momentum(k, n);
        0.5 * p * p
    }

    /// `φ` such that the kinetic step is `e^{iφ k̃²}`.
    pub fn phi(&self, dt: f64) -> f64 {
        -0.5 * dt * self.momentum_scale * self.momentum_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_bits_and_profile() {
        let p = PotentialSpec::new("x11x", 2.0);
        assert_eq!(p.fixed_bits(), vec![(1, true), (2, true)]);
        let hits: Vec<usize> = (0..16).filter(|&k| p.matches(k)).collect();
        assert_eq!(hits, vec![0b0110, 0b0111, 0b1110, 0b1111]);
        assert_eq!(p.profile()[6], 2.0);
        assert!(PotentialSpec::new("x1", 1.0)
            .with_form(PotentialForm::SingleZLow)
            .validate(2)
            .is_ok());
        assert!(PotentialSpec::new("1x", 1.0)
            .with_form(PotentialForm::SingleZLow)
            .validate(2)
            .is_err());
        assert!(PotentialSpec::new("1x", 1.0)
            .with_form(PotentialForm::SingleZHigh)
            .validate(2)
            .is_ok());
        assert!(PotentialSpec::new("x2", 1.0).validate(2).is_err());
        assert!(PotentialSpec::new("x1", 1.0).validate(3).is_err());
    }

    #[test]
    fn centered_momenta() {
        let c: Vec<i64> = (0..4).map(|k| KineticParams::centered(k, 2)).collect();
        assert_eq!(c, vec![0, 1, -2, -1]);
        assert_eq!(KineticParams::centered(1, 1), -1);
    }

    #[test]
    fn config_validation() {
        assert!(TrotterConfig::new(0.0, 1).validate().is_err());
        assert!(TrotterConfig::new(0.1, 1).order(3).validate().is_err());
        let mut c = TrotterConfig::new(0.1, 1);
        c.paper_faithful = true;
        assert!(c.validate().is_err());
        assert!(Discretization::new(0, 1.0).is_err());
        assert!(Discretization::new(2, -1.0).is_err());
    }

    #[test]
    fn wavepacket_json() {
        let w: WavepacketSpec = serde_json::from_str(r#"{"kind":"gaussian","mu":1.0,"sigma":0.5,"p":2.0}"#).unwrap();
        assert_eq!(
            w,
            WavepacketSpec::Gaussian {
                mu: 1.0,
                sigma: 0.5,
                p: 2.0
            }
        );
        let b: WavepacketSpec = serde_json::from_str(r#"{"kind":"basis","k":8}"#).unwrap();
        assert_eq!(b, WavepacketSpec::Basis { k: 8 });
    }
}
