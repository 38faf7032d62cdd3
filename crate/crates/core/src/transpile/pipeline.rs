use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::Result;

use super::{choose_layout, decompose, optimize, route, translate, BasisSet, ChipModel, Layout, LayoutStrategy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranspileOptions {
    #[serde(default)]
    pub layout: LayoutStrategy,
    #[serde(default = "yes")]
    pub optimize: bool,
}

fn yes() -> bool {
    true
}

impl Default for TranspileOptions {
    fn default() -> Self {
        TranspileOptions {
            layout: LayoutStrategy::default(),
            optimize: true,
        }
    }
}

/// Size, depth and two-qubit count after one pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassStats {
    pub pass: String,
    pub size: usize,
    pub depth: usize,
    pub two_qubit: usize,
}

impl PassStats {
    fn of(pass: &str, c: &Circuit) -> Self {
        PassStats {
            pass: pass.to_string(),
            size: c.len(),
            depth: c.depth(),
            two_qubit: c.two_qubit_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranspileReport {
    pub chip: String,
    pub layout: Vec<usize>,
    pub layout_score: f64,
    pub swaps: usize,
    pub depth: usize,
    pub two_qubit: usize,
    pub size: usize,
    pub passes: Vec<PassStats>,
}

impl TranspileReport {
    /// Per-pass changes in (size, depth, two-qubit count).
    pub fn deltas(&self) -> Vec<(String, i64, i64, i64)> {
        self.passes
            .windows(2)
            .map(|w| {
                (
                    w[1].pass.clone(),
                    w[1].size as i64 - w[0].size as i64,
                    w[1].depth as i64 - w[0].depth as i64,
                    w[1].two_qubit as i64 - w[0].two_qubit as i64,
                )
            })
            .collect()
    }
}

/// Transpiled circuit over all chip qubits, with the permutation routing left
/// behind.
#[derive(Clone, Debug)]
pub struct Transpiled {
    pub circuit: Circuit,
    pub layout: Layout,
    /// Virtual → physical at the end of the circuit.
    pub final_layout: Vec<usize>,
    /// Content starting on physical `p` ends on `final_positions[p]`.
    pub final_positions: Vec<usize>,
    pub report: TranspileReport,
}

/// decompose → layout → route → translate → optimize.
pub fn transpile_pipeline(
    circuit: &Circuit,
    chip: &ChipModel,
    basis: &BasisSet,
    options: &TranspileOptions,
) -> Result<Transpiled> {
    basis.validate()?;
    let mut passes = vec![PassStats::of("input", circuit)];
    let dec = decompose(circuit)?;
    passes.push(PassStats::of("decompose", &dec));
    let layout = choose_layout(&dec, chip, options.layout)?;
    let routed = route(&dec, &layout, chip)?;
    passes.push(PassStats::of("route", &routed.circuit));
    let mut out = translate(&routed.circuit, basis, Some(chip))?;
    passes.push(PassStats::of("translate", &out));
    if options.optimize {
        out = optimize(&out);
        passes.push(PassStats::of("optimize", &out));
    }
    let report = TranspileReport {
        chip: chip.name.clone(),
        layout: layout.mapping.clone(),
        layout_score: layout.score,
        swaps: routed.swaps,
        depth: out.depth(),
        two_qubit: out.two_qubit_count(),
        size: out.len(),
        passes,
    };
    Ok(Transpiled {
        circuit: out,
        layout,
        final_layout: routed.final_layout,
        final_positions: routed.final_positions,
        report,
    })
}
