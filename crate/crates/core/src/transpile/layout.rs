use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::GateKind;

use super::ChipModel;

/// Virtual → physical assignment and its score (lower is better).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub mapping: Vec<usize>,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutStrategy {
    Trivial,
    /// Best of at most this many connected placements.
    Scored(usize),
}

impl Default for LayoutStrategy {
    fn default() -> Self {
        LayoutStrategy::Scored(1000)
    }
}

/// Sum of the mapped gate errors. Two-qubit gates on uncoupled pairs cost
/// three times the worst CX error; measurements add the readout error.
pub fn layout_score(circuit: &Circuit, chip: &ChipModel, mapping: &[usize]) -> f64 {
    let penalty = 3.0 * chip.worst_cx_error();
    circuit
        .gates()
        .iter()
        .map(|g| {
            let p: Vec<usize> = g.qubits.iter().map(|&q| mapping[q]).collect();
            match (&g.kind, p.as_slice()) {
                (GateKind::Measure(_), [a]) => chip.readout_error(*a),
                (k, [a]) => chip.single_error(k.name(), *a),
                (_, [a, b]) => {
                    if chip.coupled(*a, *b) {
                        chip.cx_error(*a, *b).unwrap_or(0.0)
                    } else {
                        penalty
                    }
                }
                (_, many) => {
                    // wider gates should be decomposed first; charge every pair
                    let mut s = 0.0;
                    for i in 0..many.len() {
                        for j in i + 1..many.len() {
                            s += if chip.coupled(many[i], many[j]) {
                                chip.cx_error(many[i], many[j]).unwrap_or(0.0)
                            } else {
                                penalty
                            };
                        }
                    }
                    s
                }
            }
        })
        .sum()
}

/// Depth-first enumeration of injective placements whose physical set stays
/// connected, in lexicographic order of the mapping vector.
fn enumerate_connected(chip: &ChipModel, m: usize, limit: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(
        chip: &ChipModel,
        m: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        left: &mut usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if *left == 0 {
            return;
        }
        if cur.len() == m {
            visit(cur);
            *left -= 1;
            return;
        }
        let mut cands: Vec<usize> = if cur.is_empty() {
            (0..chip.num_qubits).collect()
        } else {
            cur.iter()
                .flat_map(|&p| chip.neighbors(p).iter().copied())
                .filter(|&p| !used[p])
                .collect()
        };
        cands.sort_unstable();
        cands.dedup();
        for p in cands {
            used[p] = true;
            cur.push(p);
            rec(chip, m, cur, used, left, visit);
            cur.pop();
            used[p] = false;
            if *left == 0 {
                return;
            }
        }
    }
    let mut used = vec![false; chip.num_qubits];
    let mut left = limit;
    rec(chip, m, &mut Vec::with_capacity(m), &mut used, &mut left, visit);
}

pub fn choose_layout(circuit: &Circuit, chip: &ChipModel, strategy: LayoutStrategy) -> Result<Layout> {
    let m = circuit.num_qubits();
    if m > chip.num_qubits {
        return Err(Error::InvalidArgument(format!(
            "circuit needs {m} qubits but chip {} has {}",
            chip.name, chip.num_qubits
        )));
    }
    match strategy {
        LayoutStrategy::Trivial => {
            let mapping: Vec<usize> = (0..m).collect();
            let score = layout_score(circuit, chip, &mapping);
            Ok(Layout { mapping, score })
        }
        LayoutStrategy::Scored(k) => {
            if k == 0 {
                return Err(Error::InvalidArgument("scored layout needs k ≥ 1".into()));
            }
            let mut best: Option<Layout> = None;
            enumerate_connected(chip, m, k, &mut |mapping| {
                let score = layout_score(circuit, chip, mapping);
                let better = match &best {
                    None => true,
                    Some(b) => score < b.score || (score == b.score && mapping < b.mapping.as_slice()),
                };
                if better {
                    best = Some(Layout {
                        mapping: mapping.to_vec(),
                        score,
                    });
                }
            });
            best.ok_or_else(|| Error::Routing(format!("no connected placement of {m} qubits on {}", chip.name)))
        }
    }
}
