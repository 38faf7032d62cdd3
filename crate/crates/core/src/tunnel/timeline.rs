use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::sampling::sample_probabilities;
use crate::statevector::{bitstring, simulate_statevector, StateVector};

use super::{build_trotter_steps, initial_state_circuit, Discretization, PotentialSpec, TrotterConfig, WavepacketSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimelineMode {
    ExactState,
    Counts { shots: u64, seed: u64 },
}

/// Position distribution after every step; row 0 is the initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineResult {
    pub n: usize,
    pub timesteps: usize,
    pub probabilities: Vec<Vec<f64>>,
    pub potential_profile: Vec<f64>,
}

impl TimelineResult {
    /// `timestep,state,probability`, one row per step and basis state.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("timestep,state,probability\n");
        for (t, row) in self.probabilities.iter().enumerate() {
            for (k, p) in row.iter().enumerate() {
                writeln!(s, "{t},{},{p:.12e}", bitstring(k, self.n)).unwrap();
            }
        }
        s
    }

    /// `state,position,potential` per site.
    pub fn potential_csv(&self, disc: &Discretization) -> String {
        let mut s = String::from("state,position,potential\n");
        for (k, v) in self.potential_profile.iter().enumerate() {
            writeln!(s, "{},{:.12e},{v:.12e}", bitstring(k, self.n), disc.position(k)).unwrap();
        }
        s
    }

    /// Grayscale heatmap (time down, position across), 8-bit binary PGM.
    pub fn to_pgm(&self) -> Vec<u8> {
        let w = 1usize << self.n;
        let h = self.probabilities.len();
        let peak = self
            .probabilities
            .iter()
            .flatten()
            .cloned()
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        for row in &self.probabilities {
            out.extend(row.iter().map(|p| (p / peak * 255.0).round().clamp(0.0, 255.0) as u8));
        }
        out
    }

    /// Mass on the given sites at step `t`.
    pub fn mass(&self, t: usize, sites: impl IntoIterator<Item = usize>) -> f64 {
        sites.into_iter().map(|k| self.probabilities[t][k]).sum()
    }
}

/// Marginal over the low `n` qubits.
fn working_probabilities(state: &StateVector, n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    let mut p = vec![0.0; dim];
    for (i, a) in state.amplitudes().iter().enumerate() {
        p[i & (dim - 1)] += a.norm_sqr();
    }
    p
}

pub fn run_timeline(
    disc: &Discretization,
    potential: &PotentialSpec,
    init: &WavepacketSpec,
    cfg: &TrotterConfig,
    mode: &TimelineMode,
) -> Result<TimelineResult> {
    if let TimelineMode::Counts { shots: 0, .. } = mode {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let n = disc.n;
    let mut one = cfg.clone();
    one.steps = 1;
    let step = build_trotter_steps(disc, potential, &one)?;
    let width = step.num_qubits();
    let prep = initial_state_circuit(init, disc)?;
    let mut start = Circuit::new(width, 0);
    start.compose(&prep, &(0..n).collect::<Vec<_>>(), &[])?;
    let mut state = simulate_statevector(&start, None)?;

    let mut rows = Vec::with_capacity(cfg.steps + 1);
    rows.push(working_probabilities(&state, n));
    for _ in 0..cfg.steps {
        state = simulate_statevector(&step, Some(&state))?;
        rows.push(working_probabilities(&state, n));
    }
    if let TimelineMode::Counts { shots, seed } = *mode {
        for (t, row) in rows.iter_mut().enumerate() {
            let counts = sample_probabilities(row, n, shots, &[], seed.wrapping_add(t as u64))?;
            *row = counts.probability_vector()?;
        }
    }
    Ok(TimelineResult {
        n,
        timesteps: cfg.steps,
        probabilities: rows,
        potential_profile: potential.profile(),
    })
}
