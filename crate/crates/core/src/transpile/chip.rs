use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::density::{NoiseModel, ReadoutError};
use crate::error::{Error, Result};

const NAIROBI: &str = include_str!("../../data/nairobi.json");
const OSAKA: &str = include_str!("../../data/osaka.json");

/// Coupling graph and calibration data of a device.
///
/// `gate_errors` keys look like `"cx:3,5"` or `"sx:4"`. On a directed chip
/// an edge `[c, t]` allows `CX` with control `c` and target `t` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChipRecord", into = "ChipRecord")]
pub struct ChipModel {
    pub name: String,
    pub num_qubits: usize,
    pub symmetric: bool,
    /// Native two-qubit gate is ECR; treated as CX in the IR.
    pub native_ecr: bool,
    pub edges: Vec<(usize, usize)>,
    pub gate_errors: BTreeMap<String, f64>,
    pub readout_errors: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    dist: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ChipRecord {
    #[serde(default)]
    name: String,
    num_qubits: usize,
    symmetric: bool,
    #[serde(default)]
    native_ecr: bool,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    gate_errors: BTreeMap<String, f64>,
    #[serde(default)]
    readout_errors: Vec<f64>,
}

impl TryFrom<ChipRecord> for ChipModel {
    type Error = Error;
    fn try_from(r: ChipRecord) -> Result<Self> {
        ChipModel::new(
            r.name,
            r.num_qubits,
            r.symmetric,
            r.edges,
            r.gate_errors,
            r.readout_errors,
        )
        .map(|c| c.with_native_ecr(r.native_ecr))
    }
}

impl From<ChipModel> for ChipRecord {
    fn from(c: ChipModel) -> Self {
        ChipRecord {
            name: c.name,
            num_qubits: c.num_qubits,
            symmetric: c.symmetric,
            native_ecr: c.native_ecr,
            edges: c.edges,
            gate_errors: c.gate_errors,
            readout_errors: c.readout_errors,
        }
    }
}

pub const UNREACHABLE: usize = usize::MAX;

impl ChipModel {
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        symmetric: bool,
        edges: Vec<(usize, usize)>,
        gate_errors: BTreeMap<String, f64>,
        readout_errors: Vec<f64>,
    ) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("chip has no qubits".into()));
        }
        let mut neighbors = vec![Vec::new(); num_qubits];
        for &(a, b) in &edges {
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::InvalidArgument(format!("edge ({a},{b}) outside the chip")));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on qubit {a}")));
            }
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for n in neighbors.iter_mut() {
            n.sort_unstable();
        }
        if let Some((k, v)) = gate_errors.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("gate error {k} = {v} outside [0, 1]")));
        }
        if readout_errors.len() > num_qubits || readout_errors.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(
                "readout errors must be ≤ one per qubit, in [0, 1]".into(),
            ));
        }
        let dist = (0..num_qubits).map(|s| bfs(&neighbors, s)).collect();
        Ok(ChipModel {
            name: name.into(),
            num_qubits,
            symmetric,
            native_ecr: false,
            edges,
            gate_errors,
            readout_errors,
            neighbors,
            dist,
        })
    }

    pub fn with_native_ecr(mut self, on: bool) -> Self {
        self.native_ecr = on;
        self
    }

    /// Undirected line `0-1-…-(n-1)` with uniform errors.
    pub fn line(n: usize, cx_error: f64) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        let errors = edges.iter().map(|(a, b)| (format!("cx:{a},{b}"), cx_error)).collect();
        ChipModel::new(format!("line{n}"), n, true, edges, errors, Vec::new())
    }

    /// Fully connected symmetric chip without errors.
    pub fn all_to_all(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        ChipModel::new(format!("full{n}"), n, true, edges, BTreeMap::new(), Vec::new())
    }

    /// 7-qubit T-shaped symmetric chip.
    pub fn nairobi() -> Self {
        serde_json::from_str(NAIROBI).expect("shipped chip file is valid")
    }

    /// 127-qubit heavy-hex chip with directed edges.
    pub fn osaka() -> Self {
        serde_json::from_str(OSAKA).expect("shipped chip file is valid")
    }

    /// A shipped chip by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "nairobi" => Some(Self::nairobi()),
            "osaka" => Some(Self::osaka()),
            _ => None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    /// Coupled in either direction.
    pub fn coupled(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// `CX(control, target)` is native.
    pub fn allows_cx(&self, control: usize, target: usize) -> bool {
        if self.symmetric {
            self.coupled(control, target)
        } else {
            self.edges.contains(&(control, target))
        }
    }

    /// Graph distance, or [`UNREACHABLE`].
    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.dist[a][b]
    }

    /// Shortest path `a → b` (inclusive), lowest-index neighbors first.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if self.dist[a][b] == UNREACHABLE {
            return None;
        }
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = *self.neighbors[cur]
                .iter()
                .find(|&&nb| self.dist[nb][b] + 1 == self.dist[cur][b])
                .expect("distance table is consistent");
            path.push(cur);
        }
        Some(path)
    }

    pub fn cx_error(&self, a: usize, b: usize) -> Option<f64> {
        self.gate_errors
            .get(&format!("cx:{a},{b}"))
            .or_else(|| self.gate_errors.get(&format!("cx:{b},{a}")))
            .copied()
    }

    pub fn worst_cx_error(&self) -> f64 {
        self.edges
            .iter()
            .filter_map(|&(a, b)| self.cx_error(a, b))
            .fold(0.0, f64::max)
    }

    /// Error of a one-qubit gate; `rz` is virtual and free, unknown names
    /// fall back to the `sx` entry.
    pub fn single_error(&self, name: &str, q: usize) -> f64 {
        if name == "rz" || name == "p" {
            return 0.0;
        }
        self.gate_errors
            .get(&format!("{name}:{q}"))
            .or_else(|| self.gate_errors.get(&format!("sx:{q}")))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn readout_error(&self, q: usize) -> f64 {
        self.readout_errors.get(q).copied().unwrap_or(0.0)
    }

    /// Induced sub-chip on `qubits` (new index `i` is `qubits[i]`).
    pub fn subchip(&self, qubits: &[usize]) -> Result<ChipModel> {
        let mut local = vec![usize::MAX; self.num_qubits];
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits || local[q] != usize::MAX {
                return Err(Error::InvalidArgument(format!("bad sub-chip qubit {q}")));
            }
            local[q] = i;
        }
        let mut edges = Vec::new();
        let mut errors = BTreeMap::new();
        for &(a, b) in &self.edges {
            if local[a] != usize::MAX && local[b] != usize::MAX {
                edges.push((local[a], local[b]));
                if let Some(e) = self.gate_errors.get(&format!("cx:{a},{b}")) {
                    errors.insert(format!("cx:{},{}", local[a], local[b]), *e);
                }
            }
        }
        for (i, &q) in qubits.iter().enumerate() {
            for kind in ["sx", "x"] {
                if let Some(e) = self.gate_errors.get(&format!("{kind}:{q}")) {
                    errors.insert(format!("{kind}:{i}"), *e);
                }
            }
        }
        let readout = if self.readout_errors.is_empty() {
            Vec::new()
        } else {
            qubits.iter().map(|&q| self.readout_error(q)).collect()
        };
        Ok(ChipModel::new(
            format!("{}[sub]", self.name),
            qubits.len(),
            self.symmetric,
            edges,
            errors,
            readout,
        )?
        .with_native_ecr(self.native_ecr))
    }

    /// Per-qubit symmetric readout confusion from the calibration data.
    pub fn readout_noise(&self) -> Vec<ReadoutError> {
        (0..self.num_qubits)
            .map(|q| ReadoutError::symmetric(self.readout_error(q)))
            .collect()
    }

    /// Noise model with the given depolarizing rates and this chip's readout.
    pub fn noise_model(&self, p1: f64, p2: f64) -> NoiseModel {
        NoiseModel::depolarizing(p1, p2).with_readout(self.readout_noise())
    }
}

fn bfs(neighbors: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut d = vec![UNREACHABLE; neighbors.len()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &neighbors[u] {
            if d[v] == UNREACHABLE {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}
