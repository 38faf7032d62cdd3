//! Circuit-level simulation of a particle tunneling through a discretized
//! potential, with compilation to constrained chips, error mitigation and
//! multiprogramming.

pub mod circuit;
pub mod density;
pub mod error;
pub mod gate;
pub mod hadamard;
pub mod mitigate;
pub mod multiprog;
pub mod sampling;
pub mod statevector;
pub mod synth;
pub mod transpile;
pub mod tunnel;
pub mod workflow;

pub use circuit::Circuit;
pub use density::{partial_trace, simulate_density, DensityMatrix, NoiseModel, ReadoutError};
pub use error::{Error, Result};
pub use gate::{Gate, GateKind};
pub use sampling::{execute_counts, expectation, sample_counts, CountsDistribution, Observable};
pub use statevector::{simulate_statevector, StateVector};
