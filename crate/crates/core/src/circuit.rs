//! The circuit IR shared by every module, with its JSON interchange format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};

/// An ordered list of gates over `num_qubits` virtual qubits.
///
/// Invariants are enforced on every insertion: qubit indices in range,
/// measurement targets distinct, and no gate after a measurement on the same
/// qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRecord", into = "CircuitRecord")]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
    pub metadata: BTreeMap<String, serde_json::Value>,
    measured: Vec<bool>,
    used_clbits: Vec<bool>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        assert!(num_qubits > 0, "a circuit needs at least one qubit");
        Circuit {
            num_qubits,
            num_clbits,
            gates: Vec::new(),
            metadata: BTreeMap::new(),
            measured: vec![false; num_qubits],
            used_clbits: vec![false; num_clbits],
        }
    }

    /// Fallible constructor for widths coming from user input.
    pub fn try_new(num_qubits: usize, num_clbits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidCircuit("num_qubits must be positive".into()));
        }
        Ok(Circuit::new(num_qubits, num_clbits))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn with_label(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Appends a gate after checking every circuit invariant.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate()?;
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::InvalidCircuit(format!(
                "{} targets qubit {q} but the circuit has {} qubits",
                gate.kind.name(),
                self.num_qubits
            )));
        }
        if let Some(&q) = gate.qubits.iter().find(|&&q| self.measured[q]) {
            return Err(Error::InvalidCircuit(format!(
                "{} on qubit {q} follows its measurement",
                gate.kind.name()
            )));
        }
        if let GateKind::Measure(c) = gate.kind {
            if c >= self.num_clbits {
                return Err(Error::InvalidCircuit(format!(
                    "measure targets clbit {c} but the circuit has {} clbits",
                    self.num_clbits
                )));
            }
            if self.used_clbits[c] {
                return Err(Error::InvalidCircuit(format!("clbit {c} measured twice")));
            }
            self.used_clbits[c] = true;
            self.measured[gate.qubits[0]] = true;
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `kind` on `qubits`, panicking if that breaks an invariant.
    /// Builders in this crate use it where indices are correct by construction.
    pub fn apply(&mut self, kind: GateKind, qubits: &[usize]) -> &mut Self {
        if let Err(e) = self.push(Gate::new(kind, qubits.to_vec())) {
            panic!("invalid gate application: {e}");
        }
        self
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.apply(GateKind::X, &[q])
    }
    pub fn sx(&mut self, q: usize) -> &mut Self {
        self.apply(GateKind::SX, &[q])
    }
    pub fn h(&mut self, q: usize) -> &mut Self {
        self.apply(GateKind::H, &[q])
    }
    pub fn ry(&mut self, theta: f64, q: usize) -> &mut Self {
        self.apply(GateKind::RY(theta), &[q])
    }
    pub fn rz(&mut self, theta: f64, q: usize) -> &mut Self {
        self.apply(GateKind::RZ(theta), &[q])
    }
    pub fn p(&mut self, theta: f64, q: usize) -> &mut Self {
        self.apply(GateKind::P(theta), &[q])
    }
    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.apply(GateKind::CX, &[control, target])
    }
    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.apply(GateKind::CZ, &[a, b])
    }
    pub fn cp(&mut self, theta: f64, control: usize, target: usize) -> &mut Self {
        self.apply(GateKind::CP(theta), &[control, target])
    }
    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.apply(GateKind::Swap, &[a, b])
    }
    pub fn diag(&mut self, phases: Vec<f64>, qubits: &[usize]) -> &mut Self {
        self.apply(GateKind::Diag(phases), qubits)
    }
    pub fn measure(&mut self, q: usize, clbit: usize) -> &mut Self {
        self.apply(GateKind::Measure(clbit), &[q])
    }

    /// Measures qubit `i` into clbit `i` for every `i < num_clbits`.
    pub fn measure_all(&mut self) -> &mut Self {
        for q in 0..self.num_clbits.min(self.num_qubits) {
            self.measure(q, q);
        }
        self
    }

    /// Appends every gate of `other`, mapping its qubit `i` to `qubits[i]`
    /// and its clbit `j` to `clbits[j]`.
    pub fn compose(&mut self, other: &Circuit, qubits: &[usize], clbits: &[usize]) -> Result<()> {
        if qubits.len() != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: other.num_qubits,
                found: qubits.len(),
            });
        }
        for g in &other.gates {
            let mapped: Vec<usize> = g.qubits.iter().map(|&q| qubits[q]).collect();
            let kind = match g.kind {
                GateKind::Measure(c) => GateKind::Measure(
                    *clbits
                        .get(c)
                        .ok_or_else(|| Error::InvalidCircuit(format!("no clbit mapping for clbit {c}")))?,
                ),
                ref k => k.clone(),
            };
            self.push(Gate::new(kind, mapped))?;
        }
        Ok(())
    }

    /// Appends `other` on the same qubit indices (widths must match).
    pub fn extend_from(&mut self, other: &Circuit) -> Result<()> {
        let qubits: Vec<usize> = (0..other.num_qubits).collect();
        let clbits: Vec<usize> = (0..other.num_clbits).collect();
        self.compose(other, &qubits, &clbits)
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| !g.is_unitary())
    }

    /// Copy of the circuit with all measurements dropped.
    pub fn without_measurements(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits, self.num_clbits);
        out.metadata = self.metadata.clone();
        for g in self.gates.iter().filter(|g| g.is_unitary()) {
            out.gates.push(g.clone());
        }
        out
    }

    /// `(qubit, clbit)` pairs of all measurements in circuit order.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match g.kind {
                GateKind::Measure(c) => Some((g.qubits[0], c)),
                _ => None,
            })
            .collect()
    }

    /// The inverse circuit (fails if it contains measurements).
    pub fn inverse(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.num_qubits, self.num_clbits);
        out.metadata = self.metadata.clone();
        for g in self.gates.iter().rev() {
            out.gates.push(g.inverse().ok_or(Error::MeasurementPresent)?);
        }
        Ok(out)
    }

    /// Number of unitary gates acting on exactly two qubits.
    pub fn two_qubit_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| g.is_unitary() && g.qubits.len() == 2)
            .count()
    }

    /// Number of gates of each name.
    pub fn count_ops(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for g in &self.gates {
            *out.entry(g.kind.name().to_string()).or_insert(0) += 1;
        }
        out
    }

    /// Circuit depth: longest chain of gates sharing qubits.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let l = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &g.qubits {
                level[q] = l;
            }
            depth = depth.max(l);
        }
        depth
    }

    /// Qubits touched by at least one gate, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut used = vec![false; self.num_qubits];
        for g in &self.gates {
            for &q in &g.qubits {
                used[q] = true;
            }
        }
        (0..self.num_qubits).filter(|&q| used[q]).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    name: String,
    qubits: Vec<usize>,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clbits: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct CircuitRecord {
    num_qubits: usize,
    #[serde(default)]
    num_clbits: usize,
    gates: Vec<GateRecord>,
    #[serde(default)]
    metadata: BTreeMap<String, serde_json::Value>,
}

impl TryFrom<CircuitRecord> for Circuit {
    type Error = Error;

    fn try_from(rec: CircuitRecord) -> Result<Self> {
        let mut c = Circuit::try_new(rec.num_qubits, rec.num_clbits)?;
        c.metadata = rec.metadata;
        for g in rec.gates {
            let clbit = match g.clbits.as_deref() {
                Some([c]) => Some(*c),
                Some(_) => return Err(Error::InvalidGate("measure takes exactly one clbit".into())),
                None => None,
            };
            let kind = GateKind::from_parts(&g.name, &g.params, g.phases.as_deref(), clbit)?;
            c.push(Gate::new(kind, g.qubits))?;
        }
        Ok(c)
    }
}

impl From<Circuit> for CircuitRecord {
    fn from(c: Circuit) -> Self {
        let gates = c
            .gates
            .into_iter()
            .map(|g| {
                let (phases, clbits) = match &g.kind {
                    GateKind::Diag(p) => (Some(p.clone()), None),
                    GateKind::Measure(cb) => (None, Some(vec![*cb])),
                    _ => (None, None),
                };
                GateRecord {
                    name: g.kind.name().to_string(),
                    params: g.kind.params(),
                    qubits: g.qubits,
                    phases,
                    clbits,
                }
            })
            .collect();
        CircuitRecord {
            num_qubits: c.num_qubits,
            num_clbits: c.num_clbits,
            gates,
            metadata: c.metadata,
        }
    }
}
