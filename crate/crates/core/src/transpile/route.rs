use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};

use super::{ChipModel, Layout};

/// Routed circuit over all chip qubits.
#[derive(Clone, Debug)]
pub struct Routed {
    pub circuit: Circuit,
    pub initial_layout: Vec<usize>,
    /// Virtual → physical after all inserted SWAPs.
    pub final_layout: Vec<usize>,
    /// Physical position of every chip qubit's initial content at the end:
    /// the content that started on physical `p` ends on `final_positions[p]`.
    pub final_positions: Vec<usize>,
    pub swaps: usize,
}

/// Greedy shortest-path SWAP insertion, gates in order. Measurements are
/// deferred to the end and placed on the final physical qubits.
pub fn route(circuit: &Circuit, layout: &Layout, chip: &ChipModel) -> Result<Routed> {
    let m = circuit.num_qubits();
    let np = chip.num_qubits;
    if layout.mapping.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: layout.mapping.len(),
        });
    }
    let mut seen = vec![false; np];
    for &p in &layout.mapping {
        if p >= np || seen[p] {
            return Err(Error::InvalidArgument(format!(
                "layout is not injective onto the chip at {p}"
            )));
        }
        seen[p] = true;
    }
    // content labels: virtual v for v < m, then m.. for idle physical qubits
    let mut label_at: Vec<usize> = vec![usize::MAX; np];
    let mut pos_of: Vec<usize> = Vec::with_capacity(np);
    for (v, &p) in layout.mapping.iter().enumerate() {
        label_at[p] = v;
        pos_of.push(p);
    }
    for (p, label) in label_at.iter_mut().enumerate() {
        if *label == usize::MAX {
            *label = pos_of.len();
            pos_of.push(p);
        }
    }
    let start_pos = pos_of.clone();

    let mut out = Circuit::try_new(np, circuit.num_clbits())?;
    out.metadata = circuit.metadata.clone();
    let mut deferred = Vec::new();
    let mut swaps = 0;
    for g in circuit.gates() {
        match (&g.kind, g.qubits.as_slice()) {
            (GateKind::Measure(c), [v]) => deferred.push((*v, *c)),
            (_, [v]) => out.push(Gate::new(g.kind.clone(), vec![pos_of[*v]]))?,
            (_, [a, b]) => {
                let (pa, pb) = (pos_of[*a], pos_of[*b]);
                if !chip.coupled(pa, pb) {
                    let path = chip.shortest_path(pa, pb).ok_or_else(|| {
                        Error::Routing(format!(
                            "physical qubits {pa} and {pb} are disconnected on {}",
                            chip.name
                        ))
                    })?;
                    // walk `a` toward `b` until adjacent
                    for w in path.windows(2).take(path.len() - 2) {
                        let (x, y) = (w[0], w[1]);
                        out.push(Gate::new(GateKind::Swap, vec![x, y]))?;
                        swaps += 1;
                        let (lx, ly) = (label_at[x], label_at[y]);
                        label_at.swap(x, y);
                        pos_of[lx] = y;
                        pos_of[ly] = x;
                    }
                }
                out.push(Gate::new(g.kind.clone(), vec![pos_of[*a], pos_of[*b]]))?;
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} on {} qubits must be decomposed before routing",
                    g.kind.name(),
                    g.qubits.len()
                )))
            }
        }
    }
    for (v, c) in deferred {
        out.push(Gate::new(GateKind::Measure(c), vec![pos_of[v]]))?;
    }
    let mut final_positions = vec![0; np];
    for (label, &p0) in start_pos.iter().enumerate() {
        final_positions[p0] = pos_of[label];
    }
    Ok(Routed {
        circuit: out,
        initial_layout: layout.mapping.clone(),
        final_layout: pos_of[..m].to_vec(),
        final_positions,
        swaps,
    })
}
