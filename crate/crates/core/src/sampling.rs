//! Shot sampling, counts distributions, diagonal observables and a
//! measurement-aware circuit executor.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::density::{simulate_density, DensityMatrix, NoiseModel, ReadoutError, MAX_DENSITY_QUBITS};
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};
use crate::statevector::{bitstring, simulate_statevector, StateVector};

/// Largest component the ideal executor simulates as a statevector.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

/// Anything with Born probabilities over `num_qubits` qubits.
pub trait BornProbabilities {
    fn num_qubits(&self) -> usize;
    fn born_probabilities(&self) -> Vec<f64>;
}

impl BornProbabilities for StateVector {
    fn num_qubits(&self) -> usize {
        StateVector::num_qubits(self)
    }
    fn born_probabilities(&self) -> Vec<f64> {
        self.probabilities()
    }
}

impl BornProbabilities for DensityMatrix {
    fn num_qubits(&self) -> usize {
        DensityMatrix::num_qubits(self)
    }
    fn born_probabilities(&self) -> Vec<f64> {
        self.probabilities()
    }
}

/// Shot counts keyed by bitstring (highest classical bit first).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsRecord", into = "CountsRecord")]
pub struct CountsDistribution {
    num_bits: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct CountsRecord {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<CountsRecord> for CountsDistribution {
    type Error = Error;

    fn try_from(r: CountsRecord) -> Result<Self> {
        let width = r
            .counts
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| Error::InvalidArgument("counts are empty".into()))?;
        CountsDistribution::new(width, r.shots, r.counts)
    }
}

impl From<CountsDistribution> for CountsRecord {
    fn from(c: CountsDistribution) -> Self {
        CountsRecord {
            shots: c.shots,
            counts: c.counts,
        }
    }
}

impl CountsDistribution {
    /// Validates widths, characters and the shot total. Zero entries are dropped.
    pub fn new(num_bits: usize, shots: u64, counts: BTreeMap<String, u64>) -> Result<Self> {
        if num_bits == 0 {
            return Err(Error::InvalidArgument("counts need at least one bit".into()));
        }
        let mut total = 0u64;
        for (k, v) in &counts {
            if k.len() != num_bits || !k.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::MalformedBitstring(k.clone()));
            }
            total += v;
        }
        if total != shots {
            return Err(Error::InvalidArgument(format!(
                "counts sum to {total} but shots is {shots}"
            )));
        }
        let counts = counts.into_iter().filter(|(_, v)| *v > 0).collect();
        Ok(CountsDistribution {
            num_bits,
            shots,
            counts,
        })
    }

    /// Builds counts from per-index tallies (index little-endian over the bits).
    pub fn from_indices(num_bits: usize, tallies: &BTreeMap<usize, u64>) -> Result<Self> {
        let counts: BTreeMap<String, u64> = tallies.iter().map(|(k, v)| (bitstring(*k, num_bits), *v)).collect();
        let shots = counts.values().sum();
        CountsDistribution::new(num_bits, shots, counts)
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Empirical frequency of one bitstring.
    pub fn probability(&self, key: &str) -> f64 {
        self.get(key) as f64 / self.shots as f64
    }

    /// Empirical frequencies keyed by bitstring.
    pub fn frequencies(&self) -> BTreeMap<String, f64> {
        self.counts
            .iter()
            .map(|(k, v)| (k.clone(), *v as f64 / self.shots as f64))
            .collect()
    }

    /// Dense frequency vector indexed by the little-endian value of the bitstring.
    pub fn probability_vector(&self) -> Result<Vec<f64>> {
        if self.num_bits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::TooManyQubits {
                what: "dense probability vector",
                max: MAX_STATEVECTOR_QUBITS,
                got: self.num_bits,
            });
        }
        let mut p = vec![0.0; 1 << self.num_bits];
        for (k, v) in &self.counts {
            p[crate::statevector::parse_bitstring(k)?] = *v as f64 / self.shots as f64;
        }
        Ok(p)
    }

    /// Marginal over classical bits `bits` (bit `bits[j]` becomes bit `j` of the result).
    pub fn marginal(&self, bits: &[usize]) -> Result<CountsDistribution> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("marginal over no bits".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b >= self.num_bits) {
            return Err(Error::DimensionMismatch {
                expected: self.num_bits,
                found: b + 1,
            });
        }
        let w = self.num_bits;
        let mut out: BTreeMap<String, u64> = BTreeMap::new();
        for (k, v) in &self.counts {
            let chars = k.as_bytes();
            let key: String = bits.iter().rev().map(|&b| chars[w - 1 - b] as char).collect();
            *out.entry(key).or_insert(0) += v;
        }
        CountsDistribution::new(bits.len(), self.shots, out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Total-variation distance between two empirical distributions of equal width.
pub fn total_variation(a: &CountsDistribution, b: &CountsDistribution) -> Result<f64> {
    if a.num_bits != b.num_bits {
        return Err(Error::DimensionMismatch {
            expected: a.num_bits,
            found: b.num_bits,
        });
    }
    let fa = a.frequencies();
    let fb = b.frequencies();
    let keys: std::collections::BTreeSet<&String> = fa.keys().chain(fb.keys()).collect();
    Ok(0.5
        * keys
            .into_iter()
            .map(|k| (fa.get(k).unwrap_or(&0.0) - fb.get(k).unwrap_or(&0.0)).abs())
            .sum::<f64>())
}

/// Diagonal observable: expectation is `Σ w(b)·P(b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct Observable {
    weights: BTreeMap<String, f64>,
}

impl Observable {
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self> {
        if weights.values().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("observable weights must be finite".into()));
        }
        if weights.values().all(|w| *w == 0.0) {
            return Err(Error::InvalidArgument("observable has no nonzero weight".into()));
        }
        let width = weights.keys().next().map(|k| k.len()).unwrap_or(0);
        for k in weights.keys() {
            if k.len() != width || !k.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::MalformedBitstring(k.clone()));
            }
        }
        Ok(Observable { weights })
    }

    /// Projector onto a single bitstring.
    pub fn indicator(key: &str) -> Result<Self> {
        Observable::new(BTreeMap::from([(key.to_string(), 1.0)]))
    }

    pub fn weight(&self, key: &str) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    /// Expectation under an exact distribution keyed by bitstring.
    pub fn expectation_exact(&self, probs: &BTreeMap<String, f64>) -> f64 {
        probs.iter().map(|(k, p)| self.weight(k) * p).sum()
    }
}

impl TryFrom<BTreeMap<String, f64>> for Observable {
    type Error = Error;
    fn try_from(w: BTreeMap<String, f64>) -> Result<Self> {
        Observable::new(w)
    }
}

impl From<Observable> for BTreeMap<String, f64> {
    fn from(o: Observable) -> Self {
        o.weights
    }
}

/// `Σ_b obs(b)·counts(b)/shots`.
pub fn expectation(counts: &CountsDistribution, obs: &Observable) -> f64 {
    counts
        .counts
        .iter()
        .map(|(k, v)| obs.weight(k) * *v as f64)
        .sum::<f64>()
        / counts.shots as f64
}

/// Draws `shots` basis indices from `probs`, then flips bit `q` of every shot
/// with the probabilities of `readout[q]`.
fn draw_indices(probs: &[f64], shots: u64, readout: &[ReadoutError], rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(probs.iter().map(|p| p.max(0.0)))
        .map_err(|e| Error::InvalidArgument(format!("cannot sample: {e}")))?;
    let mut out = Vec::with_capacity(shots as usize);
    for _ in 0..shots {
        let mut k = dist.sample(rng);
        for (q, r) in readout.iter().enumerate() {
            if r.is_perfect() {
                continue;
            }
            let flip = if k >> q & 1 == 0 { r.p01 } else { r.p10 };
            if rng.random::<f64>() < flip {
                k ^= 1 << q;
            }
        }
        out.push(k);
    }
    Ok(out)
}

/// Samples measurement outcomes of every qubit of `state`.
pub fn sample_counts<S: BornProbabilities>(
    state: &S,
    shots: u64,
    readout: Option<&[ReadoutError]>,
    seed: u64,
) -> Result<CountsDistribution> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let n = state.num_qubits();
    let readout = readout.unwrap_or(&[]);
    if readout.len() > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: readout.len(),
        });
    }
    sample_probabilities(&state.born_probabilities(), n, shots, readout, seed)
}

/// Samples `shots` outcomes from a probability vector over `n` bits.
pub fn sample_probabilities(
    probs: &[f64],
    n: usize,
    shots: u64,
    readout: &[ReadoutError],
    seed: u64,
) -> Result<CountsDistribution> {
    if probs.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: probs.len(),
        });
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = draw_indices(probs, shots, readout, &mut rng)?;
    let mut tallies = BTreeMap::new();
    for k in draws {
        *tallies.entry(k).or_insert(0u64) += 1;
    }
    CountsDistribution::from_indices(n, &tallies)
}

/// Groups qubits into connected components of the multi-qubit gate graph.
/// Components are ordered by smallest member; members ascend.
pub fn gate_components(circuit: &Circuit) -> Vec<Vec<usize>> {
    let n = circuit.num_qubits();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for g in circuit.gates() {
        if let Some((&first, rest)) = g.qubits.split_first() {
            for &q in rest {
                let (a, b) = (find(&mut parent, first), find(&mut parent, q));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for q in 0..n {
        let r = find(&mut parent, q);
        groups.entry(r).or_default().push(q);
    }
    groups.into_values().collect()
}

/// Restricts `circuit` to the unitary gates on `qubits` (relabelled `0..k`).
fn component_circuit(circuit: &Circuit, qubits: &[usize]) -> Result<Circuit> {
    let mut local = vec![usize::MAX; circuit.num_qubits()];
    for (i, &q) in qubits.iter().enumerate() {
        local[q] = i;
    }
    let mut out = Circuit::try_new(qubits.len(), 0)?;
    for g in circuit.gates() {
        if !g.is_unitary() || local[g.qubits[0]] == usize::MAX {
            continue;
        }
        out.push(Gate::new(g.kind.clone(), g.qubits.iter().map(|&q| local[q]).collect()))?;
    }
    Ok(out)
}

/// Born probabilities of a component, noiseless or under depolarizing noise.
fn component_probabilities(sub: &Circuit, noise: &NoiseModel, scale: f64) -> Result<Vec<f64>> {
    let noisy = noise.gate_probability(1, scale) > 0.0 || noise.gate_probability(2, scale) > 0.0;
    if noisy && !sub.is_empty() {
        if sub.num_qubits() > MAX_DENSITY_QUBITS {
            return Err(Error::TooManyQubits {
                what: "noisy component",
                max: MAX_DENSITY_QUBITS,
                got: sub.num_qubits(),
            });
        }
        Ok(simulate_density(sub, noise, scale)?.probabilities())
    } else {
        if sub.num_qubits() > MAX_STATEVECTOR_QUBITS {
            return Err(Error::TooManyQubits {
                what: "ideal component",
                max: MAX_STATEVECTOR_QUBITS,
                got: sub.num_qubits(),
            });
        }
        Ok(simulate_statevector(sub, None)?.probabilities())
    }
}

/// Runs a circuit with terminal measurements and returns counts over its
/// classical bits. Qubits are simulated per connected component of the
/// gate graph, so wide merged circuits with small independent regions stay
/// cheap; readout errors come from `noise.readout` by qubit index.
pub fn execute_counts(
    circuit: &Circuit,
    noise: &NoiseModel,
    scale: f64,
    shots: u64,
    seed: u64,
) -> Result<CountsDistribution> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if circuit.num_clbits() == 0 {
        return Err(Error::InvalidCircuit("circuit has no classical bits".into()));
    }
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise scale {scale} must be non-negative"
        )));
    }
    noise.validate()?;
    let measures = circuit.measurements();
    let mut clbit_of = vec![None; circuit.num_qubits()];
    for &(q, c) in &measures {
        clbit_of[q] = Some(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shots_bits = vec![0usize; shots as usize];
    for comp in gate_components(circuit) {
        if comp.iter().all(|&q| clbit_of[q].is_none()) {
            continue;
        }
        let sub = component_circuit(circuit, &comp)?;
        let probs = component_probabilities(&sub, noise, scale)?;
        let readout: Vec<ReadoutError> = comp.iter().map(|&q| noise.readout_for(q)).collect();
        let draws = draw_indices(&probs, shots, &readout, &mut rng)?;
        for (acc, k) in shots_bits.iter_mut().zip(draws) {
            for (i, &q) in comp.iter().enumerate() {
                if let Some(c) = clbit_of[q] {
                    *acc |= (k >> i & 1) << c;
                }
            }
        }
    }
    let mut tallies = BTreeMap::new();
    for k in shots_bits {
        *tallies.entry(k).or_insert(0u64) += 1;
    }
    CountsDistribution::from_indices(circuit.num_clbits(), &tallies)
}

/// Exact outcome distribution over the classical bits (no readout noise),
/// for circuits whose measured qubits all fit one simulation.
pub fn exact_counts_distribution(circuit: &Circuit, noise: &NoiseModel, scale: f64) -> Result<BTreeMap<String, f64>> {
    let measures = circuit.measurements();
    let unitary = circuit.without_measurements();
    let probs = component_probabilities(&unitary, noise, scale)?;
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for (k, p) in probs.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        let mut c = 0usize;
        for &(q, cb) in &measures {
            c |= (k >> q & 1) << cb;
        }
        *out.entry(bitstring(c, circuit.num_clbits())).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Appends measurements of qubits `0..k` into clbits `0..k`, widening the
/// classical register if needed.
pub fn with_measurements(circuit: &Circuit, k: usize) -> Result<Circuit> {
    let mut out = Circuit::try_new(circuit.num_qubits(), circuit.num_clbits().max(k))?;
    out.metadata = circuit.metadata.clone();
    for g in circuit.gates() {
        out.push(g.clone())?;
    }
    for q in 0..k {
        out.push(Gate::new(GateKind::Measure(q), vec![q]))?;
    }
    Ok(out)
}
