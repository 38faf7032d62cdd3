//! Running several circuits side by side on one chip, separated by idle
//! buffer qubits.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::sampling::CountsDistribution;
use crate::transpile::{ChipModel, UNREACHABLE};

/// Default minimum graph distance between regions (one idle qubit between).
pub const DEFAULT_BUFFER: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    /// Index of the circuit in the packed list.
    pub circuit: usize,
    /// Region in allocation order; local qubit `i` sits on `physical[i]`.
    pub physical: Vec<usize>,
    /// Virtual → physical for the circuit's own qubits.
    pub map: BTreeMap<usize, usize>,
    #[serde(default)]
    pub clbits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingPlan {
    pub chip: String,
    pub num_qubits: usize,
    pub buffer: usize,
    /// Ordered by circuit index.
    pub assignments: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilizationReport {
    pub qubits_used: usize,
    pub chip_size: usize,
    pub utilization: f64,
    pub circuits: usize,
}

impl std::fmt::Display for UtilizationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} circuits on {}/{} qubits (utilization {:.4})",
            self.circuits, self.qubits_used, self.chip_size, self.utilization
        )
    }
}

fn set_distance(chip: &ChipModel, a: &[usize], b: &[usize]) -> usize {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| chip.distance(x, y)))
        .min()
        .unwrap_or(UNREACHABLE)
}

/// BFS from `start` over `allowed` qubits until `width` are collected.
fn grow(chip: &ChipModel, start: usize, width: usize, allowed: &[bool]) -> Option<Vec<usize>> {
    let mut region = vec![start];
    let mut seen = vec![false; chip.num_qubits];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(q) = queue.pop_front() {
        if region.len() == width {
            break;
        }
        for &nb in chip.neighbors(q) {
            if allowed[nb] && !seen[nb] && region.len() < width {
                seen[nb] = true;
                region.push(nb);
                queue.push_back(nb);
            }
        }
    }
    (region.len() == width).then_some(region)
}

/// Greedy packing: widest circuit first (ties by index), each grown by BFS
/// from the lowest-index free qubit that keeps distance `buffer` to every
/// region already placed.
pub fn pack(circuits: &[Circuit], chip: &ChipModel, buffer: usize) -> Result<PackingPlan> {
    if circuits.is_empty() {
        return Err(Error::Packing("nothing to pack".into()));
    }
    let mut order: Vec<usize> = (0..circuits.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(circuits[i].num_qubits()), i));
    let mut regions: Vec<Option<Vec<usize>>> = vec![None; circuits.len()];
    // blocked[q]: q is within `buffer − 1` of (or inside) a placed region
    let mut blocked = vec![false; chip.num_qubits];
    for &ci in &order {
        let width = circuits[ci].num_qubits();
        if width == 0 {
            return Err(Error::Packing(format!("circuit {ci} has no qubits")));
        }
        let allowed: Vec<bool> = blocked.iter().map(|b| !b).collect();
        let region = (0..chip.num_qubits)
            .filter(|&q| allowed[q])
            .find_map(|q| grow(chip, q, width, &allowed))
            .ok_or_else(|| {
                Error::Packing(format!(
                    "circuit {ci} ({width} qubits) does not fit on {} with buffer {buffer}",
                    chip.name
                ))
            })?;
        for (q, b) in blocked.iter_mut().enumerate() {
            if region.iter().any(|&r| chip.distance(r, q) < buffer.max(1)) {
                *b = true;
            }
        }
        regions[ci] = Some(region);
    }
    let assignments = regions
        .into_iter()
        .enumerate()
        .map(|(ci, r)| {
            let physical = r.expect("every circuit placed");
            Assignment {
                circuit: ci,
                map: physical.iter().copied().enumerate().collect(),
                physical,
                clbits: circuits[ci].num_clbits(),
            }
        })
        .collect();
    let plan = PackingPlan {
        chip: chip.name.clone(),
        num_qubits: chip.num_qubits,
        buffer,
        assignments,
    };
    verify_plan(&plan, chip)?;
    Ok(plan)
}

/// Recomputes every plan invariant against `chip`.
pub fn verify_plan(plan: &PackingPlan, chip: &ChipModel) -> Result<()> {
    if plan.num_qubits != chip.num_qubits {
        return Err(Error::Packing(format!(
            "plan is for {} qubits, chip has {}",
            plan.num_qubits, chip.num_qubits
        )));
    }
    let mut owner = vec![None; chip.num_qubits];
    for (k, a) in plan.assignments.iter().enumerate() {
        if a.circuit != k {
            return Err(Error::Packing(format!("assignment {k} is for circuit {}", a.circuit)));
        }
        for &p in &a.physical {
            if p >= chip.num_qubits {
                return Err(Error::Packing(format!("qubit {p} is off the chip")));
            }
            if let Some(o) = owner[p].replace(k) {
                return Err(Error::Packing(format!("qubit {p} shared by circuits {o} and {k}")));
            }
        }
        for (v, p) in &a.map {
            if a.physical.get(*v) != Some(p) {
                return Err(Error::Packing(format!(
                    "circuit {k}: map {v}→{p} disagrees with its region"
                )));
            }
        }
        // connected: BFS inside the region reaches all of it
        let inside: Vec<bool> = (0..chip.num_qubits).map(|q| a.physical.contains(&q)).collect();
        if grow(chip, a.physical[0], a.physical.len(), &inside).is_none() {
            return Err(Error::Packing(format!("region of circuit {k} is not connected")));
        }
    }
    for (i, a) in plan.assignments.iter().enumerate() {
        for b in &plan.assignments[i + 1..] {
            let d = set_distance(chip, &a.physical, &b.physical);
            if d < plan.buffer {
                return Err(Error::Packing(format!(
                    "circuits {} and {} are {d} apart, buffer is {}",
                    a.circuit, b.circuit, plan.buffer
                )));
            }
        }
    }
    Ok(())
}

/// One circuit over the whole chip: circuit `k` qubit `i` acts on
/// `physical[i]` of its assignment and its classical bits follow those of
/// circuits `0..k`.
pub fn merge(circuits: &[Circuit], plan: &PackingPlan) -> Result<Circuit> {
    if circuits.len() != plan.assignments.len() {
        return Err(Error::Packing(format!(
            "plan has {} assignments for {} circuits",
            plan.assignments.len(),
            circuits.len()
        )));
    }
    let total_clbits: usize = plan.assignments.iter().map(|a| a.clbits).sum();
    let mut out = Circuit::try_new(plan.num_qubits, total_clbits)?;
    let mut offset = 0;
    for (c, a) in circuits.iter().zip(&plan.assignments) {
        if c.num_qubits() > a.physical.len() || c.num_clbits() != a.clbits {
            return Err(Error::Packing(format!(
                "circuit {} ({} qubits, {} clbits) does not match its assignment ({} qubits, {} clbits)",
                a.circuit,
                c.num_qubits(),
                c.num_clbits(),
                a.physical.len(),
                a.clbits
            )));
        }
        for g in c.gates() {
            let kind = match g.kind {
                crate::gate::GateKind::Measure(cb) => crate::gate::GateKind::Measure(cb + offset),
                ref k => k.clone(),
            };
            out.push(Gate::new(kind, g.qubits.iter().map(|&q| a.physical[q]).collect()))?;
        }
        offset += a.clbits;
    }
    Ok(out)
}

/// Marginal counts of every packed circuit, in circuit order.
pub fn split_counts(counts: &CountsDistribution, plan: &PackingPlan) -> Result<Vec<CountsDistribution>> {
    let total: usize = plan.assignments.iter().map(|a| a.clbits).sum();
    if counts.num_bits() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: counts.num_bits(),
        });
    }
    let mut offset = 0;
    let mut out = Vec::with_capacity(plan.assignments.len());
    for a in &plan.assignments {
        if a.clbits == 0 {
            return Err(Error::Packing(format!(
                "circuit {} has no classical bits to split",
                a.circuit
            )));
        }
        out.push(counts.marginal(&(offset..offset + a.clbits).collect::<Vec<_>>())?);
        offset += a.clbits;
    }
    Ok(out)
}

pub fn utilization(plan: &PackingPlan) -> UtilizationReport {
    let used: usize = plan.assignments.iter().map(|a| a.physical.len()).sum();
    UtilizationReport {
        qubits_used: used,
        chip_size: plan.num_qubits,
        utilization: used as f64 / plan.num_qubits as f64,
        circuits: plan.assignments.len(),
    }
}

impl PackingPlan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
