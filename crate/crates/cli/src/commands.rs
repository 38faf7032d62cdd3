//! One function per subcommand. Each returns the files it would write, so
//! runs can be compared byte for byte without touching the disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use qtunnel::hadamard::run_hadamard_test;
use qtunnel::mitigate::{apply_rem, build_confusion_matrix, fold_local, RemMode};
use qtunnel::multiprog::{pack, utilization, verify_plan};
use qtunnel::sampling::exact_counts_distribution;
use qtunnel::statevector::bitstring;
use qtunnel::transpile::{transpile_pipeline, BasisSet};
use qtunnel::tunnel::{build_evolution_circuit, run_timeline, TimelineMode};
use qtunnel::workflow::{run_endtoend, EndToEnd};
use qtunnel::{execute_counts, simulate_statevector, Circuit, NoiseModel, ReadoutError};

use crate::config::{Mode, ScenarioConfig};
use crate::error::CliError;

/// Seed offset separating calibration shots from the measured run.
const CALIBRATION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    /// File name and contents, in writing order.
    pub files: Vec<(String, Vec<u8>)>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
}

impl Output {
    fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(CliError::pipeline)?;
        s.push('\n');
        self.text(name, s);
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

fn evolution(cfg: &ScenarioConfig, measure: bool) -> Result<Circuit, CliError> {
    Ok(build_evolution_circuit(
        &cfg.discretization()?,
        &cfg.potential,
        &cfg.initial,
        &cfg.trotter(),
        measure,
    )?)
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let disc = cfg.discretization()?;
    let mode = match cfg.mode {
        Mode::Exact => TimelineMode::ExactState,
        Mode::Counts => TimelineMode::Counts {
            shots: cfg.require_shots()?,
            seed: cfg.require_seed()?,
        },
    };
    let r = run_timeline(&disc, &cfg.potential, &cfg.initial, &cfg.trotter(), &mode)?;
    let mut out = Output::default();
    out.text("timeline.csv", r.to_csv());
    out.text("potential.csv", r.potential_csv(&disc));
    if cfg.pgm {
        out.files.push(("timeline.pgm".into(), r.to_pgm()));
    }
    out.summary
        .push(format!("{} rows x {} states", r.timesteps + 1, disc.sites()));
    Ok(out)
}

pub fn endtoend(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let zne = cfg
        .zne
        .clone()
        .ok_or_else(|| CliError::config("endtoend needs a `zne` section"))?;
    if cfg.transmission.is_empty() {
        return Err(CliError::config("endtoend needs `transmission` states"));
    }
    let mut e = EndToEnd::new(
        cfg.discretization()?,
        cfg.potential.clone(),
        cfg.initial.clone(),
        cfg.trotter(),
        cfg.chip()?,
    );
    e.noise = cfg.noise.clone();
    e.zne = zne;
    e.transmission = cfg.transmission.clone();
    e.shots = cfg.require_shots()?;
    e.seed = cfg.require_seed()?;
    e.rem = cfg.rem;
    e.multiprogram = cfg.multiprogram;
    e.buffer = cfg.buffer;
    e.transpile = cfg.transpile.clone();
    let r = run_endtoend(&e)?;

    let mut out = Output::default();
    out.json("report.json", &r.report)?;
    out.json("plan.json", &r.plan)?;
    out.json("utilization.json", &r.utilization)?;
    out.json("transpile.json", &r.transpile)?;
    out.json("counts.json", &r.counts)?;
    if !r.confusion.is_empty() {
        out.json("confusion.json", &r.confusion)?;
    }
    let m = &r.report;
    out.summary.push(format!(
        "T = {:.6}  T_run = {:.6}  E1 = {:.6}  T_em = {:.6}  E2 = {:.6}",
        m.t, m.t_run, m.e1, m.t_em, m.e2
    ));
    out.summary.push(r.utilization.to_string());
    Ok(out)
}

#[derive(Serialize)]
struct StateGroup {
    states: Vec<String>,
    ideal: f64,
    raw: f64,
    mitigated: f64,
}

#[derive(Serialize)]
struct RemSummary {
    n: usize,
    shots: u64,
    mode: RemMode,
    ideal: BTreeMap<String, f64>,
    raw: BTreeMap<String, f64>,
    mitigated: BTreeMap<String, f64>,
    pre_clip: BTreeMap<String, f64>,
    clipped_mass: f64,
    residual: f64,
    raw_tv: f64,
    mitigated_tv: f64,
    /// States under the potential.
    barrier: StateGroup,
}

fn tv(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

pub fn rem(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let n = cfg.n;
    let shots = cfg.require_shots()?;
    let seed = cfg.require_seed()?;
    let readout: Vec<ReadoutError> = match cfg.readout_flip {
        Some(f) => vec![ReadoutError::symmetric(f); n],
        None if cfg.noise.readout => {
            let chip = cfg.chip()?;
            if chip.num_qubits < n {
                return Err(CliError::config(format!(
                    "chip {} has fewer than {n} qubits",
                    chip.name
                )));
            }
            chip.readout_noise()[..n].to_vec()
        }
        None => Vec::new(),
    };
    let noise = NoiseModel::depolarizing(cfg.noise.p1, cfg.noise.p2).with_readout(readout);
    let circuit = evolution(cfg, true)?;
    let counts = execute_counts(&circuit, &noise, 1.0, shots, seed)?;
    let mode = cfg.rem.unwrap_or(RemMode::Correlated);
    let mut k = 0u64;
    let m = build_confusion_matrix(
        |c, s| {
            k += 1;
            execute_counts(c, &noise, 1.0, s, seed ^ CALIBRATION_STREAM.wrapping_mul(k))
        },
        n,
        shots,
        mode,
    )?;
    let mitigated = apply_rem(&m, &counts)?;

    let ideal_sparse = exact_counts_distribution(&circuit, &NoiseModel::noiseless(), 1.0)?;
    let all: Vec<String> = (0..1usize << n).map(|k| bitstring(k, n)).collect();
    let dense = |f: &dyn Fn(&str) -> f64| -> BTreeMap<String, f64> { all.iter().map(|s| (s.clone(), f(s))).collect() };
    let ideal = dense(&|s| ideal_sparse.get(s).copied().unwrap_or(0.0));
    let raw = dense(&|s| counts.probability(s));
    let mitigated_map = mitigated.as_map();
    let pre_clip: BTreeMap<String, f64> = all.iter().cloned().zip(mitigated.raw.iter().copied()).collect();
    let barrier_states: Vec<String> = (0..1usize << n)
        .filter(|&k| cfg.potential.matches(k))
        .map(|k| bitstring(k, n))
        .collect();
    let sum = |m: &BTreeMap<String, f64>| barrier_states.iter().map(|s| m[s]).sum::<f64>();
    let summary = RemSummary {
        n,
        shots,
        mode,
        raw_tv: tv(&raw, &ideal),
        mitigated_tv: tv(&mitigated_map, &ideal),
        barrier: StateGroup {
            states: barrier_states.clone(),
            ideal: sum(&ideal),
            raw: sum(&raw),
            mitigated: sum(&mitigated_map),
        },
        ideal,
        raw,
        mitigated: mitigated_map,
        pre_clip,
        clipped_mass: mitigated.clipped_mass,
        residual: mitigated.residual,
    };

    let mut out = Output::default();
    out.json("counts.json", &counts)?;
    out.json("confusion.json", &m)?;
    out.json("rem.json", &summary)?;
    out.summary.push(format!(
        "barrier {:?}: ideal {:.6}  raw {:.6}  mitigated {:.6}",
        summary.barrier.states, summary.barrier.ideal, summary.barrier.raw, summary.barrier.mitigated
    ));
    out.summary.push(format!(
        "total variation to ideal: raw {:.6}  mitigated {:.6}",
        summary.raw_tv, summary.mitigated_tv
    ));
    Ok(out)
}

pub fn transpile(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let circuit = evolution(cfg, true)?;
    let mut out = Output::default();
    out.text("circuit.json", circuit.to_json()? + "\n");
    for (name, chip) in cfg.target_chips()? {
        let label = Path::new(&name)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or(name.clone());
        let t = transpile_pipeline(&circuit, &chip, &BasisSet::default(), &cfg.transpile)?;
        out.json(&format!("transpile_{label}.json"), &t.report)?;
        out.text(&format!("circuit_{label}.json"), t.circuit.to_json()? + "\n");
        out.summary.push(format!(
            "{label}: depth {}  two-qubit {}  size {}  swaps {}  layout {:?}",
            t.report.depth, t.report.two_qubit, t.report.size, t.report.swaps, t.report.layout
        ));
    }
    Ok(out)
}

pub fn hadamard(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let base = evolution(cfg, false)?;
    let r = run_hadamard_test(&base, cfg.require_shots()?, cfg.require_seed()?)?;
    let n = cfg.n;
    let state = simulate_statevector(&base, None)?;
    let mut born = vec![0.0; 1 << n];
    for (k, p) in state.probabilities().into_iter().enumerate() {
        born[k & ((1 << n) - 1)] += p;
    }
    let born: BTreeMap<String, f64> = born
        .into_iter()
        .enumerate()
        .map(|(k, p)| (bitstring(k, n), p))
        .collect();
    let mut out = Output::default();
    out.json("hadamard.json", &r)?;
    out.json("born.json", &born)?;
    out.summary
        .push(format!("shots {}  sum(re + im) = {:.6}", r.shots, r.total()));
    Ok(out)
}

/// Packs the folded circuits of the ZNE sweep onto the chip.
pub fn pack_cmd(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let chip = cfg.chip()?;
    let zne = cfg.zne.clone().unwrap_or_default();
    let base = evolution(cfg, true)?;
    let circuits = zne
        .scale_factors
        .iter()
        .map(|&l| fold_local(&base, l))
        .collect::<qtunnel::Result<Vec<_>>>()?;
    let plan = pack(&circuits, &chip, cfg.buffer)?;
    verify_plan(&plan, &chip)?;
    let u = utilization(&plan);
    let mut out = Output::default();
    out.json("plan.json", &plan)?;
    out.json("utilization.json", &u)?;
    out.summary.push(u.to_string());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_qubit() -> ScenarioConfig {
        ScenarioConfig::parse(
            r#"{
                "n": 2, "L": 2.194, "dt": 0.1, "steps": 4,
                "potential": {"pattern": "x1", "v": 1.0, "form": "single_z_low"},
                "initial": {"kind": "basis", "k": 0},
                "chip": "osaka", "shots": 4000, "seed": 3,
                "transmission": ["10"]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn zero_steps_gives_one_row() {
        let mut c = two_qubit();
        c.steps = 0;
        let o = simulate(&c).unwrap();
        let csv = String::from_utf8(o.file("timeline.csv").unwrap().to_vec()).unwrap();
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(csv.contains("0,00,1.0"));
    }

    #[test]
    fn counts_mode_needs_seed() {
        let mut c = two_qubit();
        c.mode = Mode::Counts;
        c.seed = None;
        assert!(matches!(simulate(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn rem_without_readout_noise_changes_nothing() {
        let o = rem(&two_qubit()).unwrap();
        let v: serde_json::Value = serde_json::from_slice(o.file("rem.json").unwrap()).unwrap();
        for (k, raw) in v["raw"].as_object().unwrap() {
            let m = v["mitigated"][k].as_f64().unwrap();
            assert!((m - raw.as_f64().unwrap()).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn rem_with_flips_moves_towards_ideal() {
        let mut c = two_qubit();
        c.readout_flip = Some(0.1);
        c.shots = Some(50_000);
        let o = rem(&c).unwrap();
        let v: serde_json::Value = serde_json::from_slice(o.file("rem.json").unwrap()).unwrap();
        assert!(v["mitigated_tv"].as_f64().unwrap() < 0.5 * v["raw_tv"].as_f64().unwrap());
    }

    #[test]
    fn endtoend_requires_zne() {
        assert!(matches!(endtoend(&two_qubit()), Err(CliError::Config(_))));
    }

    #[test]
    fn pack_sweep_on_osaka() {
        let o = pack_cmd(&two_qubit()).unwrap();
        assert_eq!(o.summary[0], "5 circuits on 10/127 qubits (utilization 0.0787)");
    }

    #[test]
    fn transpile_reports_both_chips() {
        let o = transpile(&two_qubit()).unwrap();
        assert!(o.file("transpile_nairobi.json").is_some());
        assert!(o.file("transpile_osaka.json").is_some());
        assert_eq!(o.summary.len(), 2);
    }
}
