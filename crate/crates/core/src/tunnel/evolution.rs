use crate::circuit::Circuit;
use crate::error::Result;
use crate::gate::{Gate, GateKind};

use super::{
    build_kinetic, build_potential, build_qft, initial_state_circuit, Discretization, KineticParams, PotentialSpec,
    TrotterConfig, WavepacketSpec,
};

fn append(dst: &mut Circuit, src: &Circuit) -> Result<()> {
    let qubits: Vec<usize> = (0..src.num_qubits()).collect();
    dst.compose(src, &qubits, &[])
}

/// `cfg.steps` Trotter steps without state preparation.
///
/// Order 1 is `[QFT; K(Δt); IQFT; V(Δt)]`, order 2 is
/// `[V(Δt/2); QFT; K(Δt); IQFT; V(Δt/2)]`. With `use_ancilla` the ancilla
/// is qubit `n`.
pub fn build_trotter_steps(disc: &Discretization, potential: &PotentialSpec, cfg: &TrotterConfig) -> Result<Circuit> {
    disc.validate()?;
    cfg.validate()?;
    potential.validate(disc.n)?;
    let n = disc.n;
    let width = cfg.width(n);
    let params = KineticParams::new(disc).paper_faithful(cfg.paper_faithful);
    let qft = build_qft(n, false);
    let iqft = build_qft(n, true);
    let kin = build_kinetic(n, cfg.dt, &params, cfg.use_ancilla)?;
    let (pot_full, pot_half) = (
        build_potential(potential, cfg.dt, cfg.use_ancilla)?,
        build_potential(potential, cfg.dt / 2.0, cfg.use_ancilla)?,
    );
    let mut step = Circuit::new(width, 0);
    if cfg.order == 2 {
        append(&mut step, &pot_half)?;
    }
    step.compose(&qft, &(0..n).collect::<Vec<_>>(), &[])?;
    append(&mut step, &kin)?;
    step.compose(&iqft, &(0..n).collect::<Vec<_>>(), &[])?;
    append(&mut step, if cfg.order == 2 { &pot_half } else { &pot_full })?;

    let mut c = Circuit::new(width, 0);
    for _ in 0..cfg.steps {
        append(&mut c, &step)?;
    }
    c.metadata.insert("label".into(), "time_evo".into());
    c.metadata.insert("work_qubits".into(), n.into());
    Ok(c)
}

/// State preparation followed by the Trotter steps; with `measure`, the
/// working register is measured into clbits `0..n`.
pub fn build_evolution_circuit(
    disc: &Discretization,
    potential: &PotentialSpec,
    init: &WavepacketSpec,
    cfg: &TrotterConfig,
    measure: bool,
) -> Result<Circuit> {
    let n = disc.n;
    let steps = build_trotter_steps(disc, potential, cfg)?;
    let prep = initial_state_circuit(init, disc)?;
    let mut c = Circuit::try_new(cfg.width(n), if measure { n } else { 0 })?;
    c.compose(&prep, &(0..n).collect::<Vec<_>>(), &[])?;
    append(&mut c, &steps)?;
    if measure {
        for q in 0..n {
            c.push(Gate::new(GateKind::Measure(q), vec![q]))?;
        }
    }
    c.metadata.insert("label".into(), "time_evo".into());
    c.metadata.insert("work_qubits".into(), n.into());
    c.metadata.insert("steps".into(), cfg.steps.into());
    Ok(c)
}
