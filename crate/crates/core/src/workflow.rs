//! The full noisy tunnelling experiment: build, transpile onto chip regions,
//! fold, run all noise scales as one multiprogrammed circuit, split, mitigate.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::density::NoiseModel;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::mitigate::{
    apply_rem, build_confusion_matrix, extrapolate, fold_local, ConfusionMatrix, MitigationReport, RemMode, ZneConfig,
};
use crate::multiprog::{
    merge, pack, split_counts, utilization, verify_plan, PackingPlan, UtilizationReport, DEFAULT_BUFFER,
};
use crate::sampling::{exact_counts_distribution, execute_counts, CountsDistribution};
use crate::transpile::{transpile_pipeline, BasisSet, ChipModel, TranspileOptions, TranspileReport};
use crate::tunnel::{build_evolution_circuit, Discretization, PotentialSpec, TrotterConfig, WavepacketSpec};

/// Depolarizing rates; chip readout errors are included when `readout` is set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default)]
    pub readout: bool,
}

impl NoiseParams {
    pub fn model(&self, chip: &ChipModel) -> NoiseModel {
        if self.readout {
            chip.noise_model(self.p1, self.p2)
        } else {
            NoiseModel::depolarizing(self.p1, self.p2)
        }
    }
}

#[derive(Clone, Debug)]
pub struct EndToEnd {
    pub disc: Discretization,
    pub potential: PotentialSpec,
    pub initial: WavepacketSpec,
    pub trotter: TrotterConfig,
    pub chip: ChipModel,
    pub noise: NoiseParams,
    pub zne: ZneConfig,
    /// Bitstrings (qubit n−1 first) whose total probability is the transmission.
    pub transmission: Vec<String>,
    pub shots: u64,
    pub seed: u64,
    /// Readout mitigation of every split distribution before extrapolation.
    pub rem: Option<RemMode>,
    /// All scale factors in one merged run when set; one run each otherwise.
    pub multiprogram: bool,
    pub buffer: usize,
    pub transpile: TranspileOptions,
}

impl EndToEnd {
    pub fn new(
        disc: Discretization,
        potential: PotentialSpec,
        initial: WavepacketSpec,
        trotter: TrotterConfig,
        chip: ChipModel,
    ) -> Self {
        EndToEnd {
            disc,
            potential,
            initial,
            trotter,
            chip,
            noise: NoiseParams {
                p1: 0.0,
                p2: 0.0,
                readout: false,
            },
            zne: ZneConfig::default(),
            transmission: Vec::new(),
            shots: 10_000,
            seed: 0,
            rem: None,
            multiprogram: true,
            buffer: DEFAULT_BUFFER,
            transpile: TranspileOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndToEndOutput {
    pub report: MitigationReport,
    pub plan: PackingPlan,
    pub utilization: UtilizationReport,
    /// The base circuit before folding.
    pub transpile: TranspileReport,
    /// Raw split counts, one per scale factor.
    pub counts: Vec<CountsDistribution>,
    pub confusion: Vec<ConfusionMatrix>,
}

fn transmission_of(states: &[String], prob: impl Fn(&str) -> Result<f64>) -> Result<f64> {
    states.iter().map(|s| prob(s)).sum()
}

/// Ordering of `region` whose induced coupling equals that of `reference`
/// (position by position, directions included), found by backtracking.
pub fn align_region(chip: &ChipModel, reference: &[usize], region: &[usize]) -> Option<Vec<usize>> {
    if reference.len() != region.len() {
        return None;
    }
    let rel = |a: usize, b: usize| (chip.allows_cx(a, b), chip.allows_cx(b, a), chip.coupled(a, b));
    fn rec(
        k: usize,
        reference: &[usize],
        region: &[usize],
        cur: &mut Vec<usize>,
        used: &mut [bool],
        rel: &dyn Fn(usize, usize) -> (bool, bool, bool),
    ) -> bool {
        if k == reference.len() {
            return true;
        }
        for (i, &p) in region.iter().enumerate() {
            if used[i] || !(0..k).all(|j| rel(cur[j], p) == rel(reference[j], reference[k])) {
                continue;
            }
            used[i] = true;
            cur.push(p);
            if rec(k + 1, reference, region, cur, used, rel) {
                return true;
            }
            cur.pop();
            used[i] = false;
        }
        false
    }
    let mut cur = Vec::with_capacity(region.len());
    let mut used = vec![false; region.len()];
    rec(0, reference, region, &mut cur, &mut used, &rel).then_some(cur)
}

/// Circuit `c` over `plan.num_qubits`, local qubit `i` on `region[i]`.
fn place(c: &Circuit, region: &[usize], width: usize) -> Result<Circuit> {
    let mut out = Circuit::try_new(width, c.num_clbits())?;
    for g in c.gates() {
        out.push(Gate::new(g.kind.clone(), g.qubits.iter().map(|&q| region[q]).collect()))?;
    }
    Ok(out)
}

pub fn run_endtoend(cfg: &EndToEnd) -> Result<EndToEndOutput> {
    cfg.zne.validate()?;
    if cfg.shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let n = cfg.disc.n;
    if cfg.transmission.is_empty() {
        return Err(Error::InvalidArgument("no transmission states given".into()));
    }
    for s in &cfg.transmission {
        if s.len() != n || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::MalformedBitstring(s.clone()));
        }
    }
    let logical = build_evolution_circuit(&cfg.disc, &cfg.potential, &cfg.initial, &cfg.trotter, true)?;
    let ideal = exact_counts_distribution(&logical, &NoiseModel::noiseless(), 1.0)?;
    let t = transmission_of(&cfg.transmission, |s| Ok(ideal.get(s).copied().unwrap_or(0.0)))?;

    let m = cfg.zne.scale_factors.len();
    let copies = vec![logical.clone(); m];
    let plan = if cfg.multiprogram {
        pack(&copies, &cfg.chip, cfg.buffer)?
    } else {
        // same region for every scale; runs are separate
        let one = pack(&copies[..1], &cfg.chip, cfg.buffer)?;
        PackingPlan {
            assignments: (0..m)
                .map(|k| {
                    let mut a = one.assignments[0].clone();
                    a.circuit = k;
                    a
                })
                .collect(),
            ..one
        }
    };

    // One transpiled circuit serves every scale factor, so the folds all
    // start from the same gates. Other regions are reordered to match the
    // first one's coupling (edge directions included).
    let mut plan = plan;
    let reference = plan.assignments[0].physical.clone();
    for a in plan.assignments.iter_mut().skip(1) {
        let aligned = align_region(&cfg.chip, &reference, &a.physical)
            .ok_or_else(|| Error::Packing(format!("region {:?} is not coupled like {:?}", a.physical, reference)))?;
        a.map = aligned.iter().copied().enumerate().take(logical.num_qubits()).collect();
        a.physical = aligned;
    }
    if cfg.multiprogram {
        verify_plan(&plan, &cfg.chip)?;
    }
    let sub = cfg.chip.subchip(&reference)?;
    let base = transpile_pipeline(&logical, &sub, &BasisSet::default(), &cfg.transpile)?;
    // folding comes after optimization, never before
    let folded: Vec<Circuit> = cfg
        .zne
        .scale_factors
        .iter()
        .map(|&lambda| fold_local(&base.circuit, lambda))
        .collect::<Result<_>>()?;

    let noise = cfg.noise.model(&cfg.chip);
    let counts: Vec<CountsDistribution> = if cfg.multiprogram {
        let merged = merge(&folded, &plan)?;
        split_counts(&execute_counts(&merged, &noise, 1.0, cfg.shots, cfg.seed)?, &plan)?
    } else {
        folded
            .iter()
            .zip(&plan.assignments)
            .enumerate()
            .map(|(k, (c, a))| {
                let placed = place(c, &a.physical, plan.num_qubits)?;
                execute_counts(&placed, &noise, 1.0, cfg.shots, cfg.seed.wrapping_add(k as u64))
            })
            .collect::<Result<_>>()?
    };

    let mut confusion = Vec::new();
    let mut points = Vec::with_capacity(m);
    for (k, (c, a)) in counts.iter().zip(&plan.assignments).enumerate() {
        let e = match cfg.rem {
            None => transmission_of(&cfg.transmission, |s| Ok(c.probability(s)))?,
            Some(mode) => {
                // clbit j is read from physical a.physical[final_layout[j]]
                let readout_qubits: Vec<usize> = base.final_layout.iter().map(|&l| a.physical[l]).collect();
                let cal_seed = cfg.seed ^ 0x9e37_79b9_7f4a_7c15;
                let mut calls = 0u64;
                let cm = build_confusion_matrix(
                    |cal, shots| {
                        calls += 1;
                        let placed = place(cal, &readout_qubits, plan.num_qubits)?;
                        execute_counts(
                            &placed,
                            &noise,
                            1.0,
                            shots,
                            cal_seed.wrapping_add(1000 * k as u64 + calls),
                        )
                    },
                    n,
                    cfg.shots,
                    mode,
                )?;
                let r = apply_rem(&cm, c)?;
                confusion.push(cm);
                transmission_of(&cfg.transmission, |s| r.probability(s))?
            }
        };
        points.push((cfg.zne.scale_factors[k], e));
    }
    let t_em = extrapolate(&points, cfg.zne.extrapolator)?;
    let report = MitigationReport::new(t, points[0].1, t_em, points, cfg.zne.extrapolator);
    Ok(EndToEndOutput {
        report,
        utilization: utilization(&plan),
        plan,
        transpile: base.report,
        counts,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mitigate::Extrapolator;
    use crate::tunnel::PotentialForm;

    fn base() -> EndToEnd {
        let disc = Discretization::new(2, 2.194).unwrap();
        let pot = PotentialSpec::new("x1", 1.0).with_form(PotentialForm::SingleZLow);
        let mut e = EndToEnd::new(
            disc,
            pot,
            WavepacketSpec::Basis { k: 0 },
            TrotterConfig::new(0.1, 7),
            ChipModel::osaka(),
        );
        e.transmission = vec!["10".into()];
        e.shots = 20_000;
        e.seed = 4;
        e
    }

    #[test]
    fn noiseless_run_matches_ideal() {
        let out = run_endtoend(&base()).unwrap();
        let r = &out.report;
        let sigma = (r.t * (1.0 - r.t) / 20_000.0).sqrt();
        assert!(r.e1.abs() < 4.0 * sigma, "{r:?}");
        // all points are noiseless samples of the same value
        for &(_, e) in &r.points {
            assert!((e - r.t).abs() < 4.0 * sigma);
        }
        assert_eq!((out.utilization.qubits_used, out.utilization.chip_size), (10, 127));
        assert_eq!(out.transpile.passes.last().unwrap().pass, "optimize");
    }

    #[test]
    fn noise_lowers_transmission_and_mitigation_helps() {
        let mut cfg = base();
        cfg.noise = NoiseParams {
            p1: 0.0005,
            p2: 0.01,
            readout: false,
        };
        cfg.shots = 200_000;
        cfg.zne.extrapolator = Extrapolator::Polynomial { degree: 2 };
        let r = run_endtoend(&cfg).unwrap().report;
        assert!(r.e1 > 0.0);
        assert!(r.points.windows(2).all(|w| w[1].1 < w[0].1), "{r:?}");
        assert!(r.e2 < r.e1, "{r:?}");
    }

    #[test]
    fn separate_runs_and_rem() {
        let mut cfg = base();
        cfg.multiprogram = false;
        cfg.noise = NoiseParams {
            p1: 0.0,
            p2: 0.0,
            readout: true,
        };
        cfg.rem = Some(RemMode::Correlated);
        cfg.zne.extrapolator = Extrapolator::Polynomial { degree: 1 };
        let out = run_endtoend(&cfg).unwrap();
        assert_eq!(out.confusion.len(), 5);
        let r = &out.report;
        // readout bias is gone from every mitigated point
        assert!(r.points.iter().all(|&(_, e)| (e - r.t).abs() < 0.015), "{r:?}");
        assert!(r.e2 < 0.03, "{r:?}");
        let raw = out.counts[0].probability("10");
        assert!(r.t - raw > 0.02, "readout should bias the raw value: {raw}");
        // the same region serves every scale factor
        assert!(out.plan.assignments.windows(2).all(|w| w[0].physical == w[1].physical));
    }

    #[test]
    fn regions_are_aligned() {
        let chip = ChipModel::osaka();
        // 0→1 is directed control-first; 1–2 is the reverse
        assert!(chip.allows_cx(0, 1) && chip.allows_cx(2, 1));
        assert_eq!(align_region(&chip, &[0, 1], &[1, 2]), Some(vec![2, 1]));
        assert_eq!(align_region(&chip, &[0, 1], &[0, 2]), None);
        let out = run_endtoend(&base()).unwrap();
        let subs: Vec<_> = out
            .plan
            .assignments
            .iter()
            .map(|a| chip.subchip(&a.physical).unwrap().edges)
            .collect();
        assert!(subs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn rejects_bad_targets() {
        let mut cfg = base();
        cfg.transmission = vec!["1".into()];
        assert!(run_endtoend(&cfg).is_err());
    }
}
