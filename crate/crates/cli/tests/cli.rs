mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use qtunnel_cli::{commands, CliError, Output, ScenarioConfig};
use serde_json::Value;

use common::{scenario, scenario_path, workspace, SCENARIOS};

fn qtunnel(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qtunnel")).args(args).output().unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = workspace().join("schemas").join(format!("{name}.schema.json"));
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&v).unwrap()
}

fn assert_valid(schema_name: &str, file: &str, bytes: &[u8]) {
    let v: Value = serde_json::from_slice(bytes).unwrap();
    let errors: Vec<String> = schema(schema_name).iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{file} against {schema_name}: {errors:?}");
}

fn schema_for(file: &str) -> &'static str {
    match file {
        "report.json" => "mitigation_report",
        "plan.json" => "packing_plan",
        "utilization.json" => "utilization",
        "transpile.json" => "transpile_report",
        "counts.json" => "counts",
        "confusion.json" => "confusion",
        "rem.json" => "rem",
        "hadamard.json" => "hadamard",
        "born.json" => "born",
        f if f.starts_with("transpile_") => "transpile_report",
        f if f.starts_with("circuit") => "circuit",
        f => panic!("no schema for {f}"),
    }
}

fn run(cmd: &str, cfg: &ScenarioConfig) -> Output {
    match cmd {
        "simulate" => commands::simulate(cfg),
        "endtoend" => commands::endtoend(cfg),
        "rem" => commands::rem(cfg),
        "transpile" => commands::transpile(cfg),
        "hadamard" => commands::hadamard(cfg),
        "pack" => commands::pack_cmd(cfg),
        _ => unreachable!(),
    }
    .unwrap()
}

fn json(o: &Output, name: &str) -> Value {
    serde_json::from_slice(o.file(name).unwrap()).unwrap()
}

#[test]
fn shipped_scenarios_match_their_schema() {
    let v = schema("scenario");
    for (name, _) in SCENARIOS {
        let doc: Value = serde_json::from_str(&fs::read_to_string(scenario_path(name)).unwrap()).unwrap();
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
}

#[test]
fn every_emitted_json_matches_its_schema() {
    for (name, cmd) in SCENARIOS {
        let mut cfg = scenario(name);
        if *cmd == "endtoend" {
            cfg.shots = Some(20_000);
            cfg.rem = Some(qtunnel::mitigate::RemMode::Local);
            cfg.noise.readout = true;
        }
        let out = run(cmd, &cfg);
        for (file, bytes) in &out.files {
            if !file.ends_with(".json") {
                continue;
            }
            let s = match (*cmd, file.as_str()) {
                ("endtoend", "counts.json") => "counts_list",
                ("endtoend", "confusion.json") => "confusion_list",
                _ => schema_for(file),
            };
            assert_valid(s, file, bytes);
        }
    }
}

#[test]
fn wall_scenario_writes_full_timeline() {
    let out = run("simulate", &scenario("wall_1xxx"));
    let csv = String::from_utf8(out.file("timeline.csv").unwrap().to_vec()).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 21 * 16);
    assert!(rows.last().unwrap().starts_with("20,1111,"));
    let pot = String::from_utf8(out.file("potential.csv").unwrap().to_vec()).unwrap();
    assert_eq!(pot.lines().count(), 17);
    let pgm = out.file("timeline.pgm").unwrap();
    assert!(pgm.starts_with(b"P5\n16 21\n255\n"));
    assert_eq!(pgm.len(), b"P5\n16 21\n255\n".len() + 16 * 21);
}

#[test]
fn multiple_wells_lose_mass_from_start_state() {
    let out = run("simulate", &scenario("wells_xxx1"));
    let csv = String::from_utf8(out.file("timeline.csv").unwrap().to_vec()).unwrap();
    let p = |t: usize| -> f64 {
        let row = csv.lines().find(|l| l.starts_with(&format!("{t},1000,"))).unwrap();
        row.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert_eq!(p(0), 1.0);
    assert!(p(20) < 0.9);
}

#[test]
fn noiseless_endtoend_needs_no_mitigation() {
    let mut cfg = scenario("endtoend");
    cfg.noise = Default::default();
    cfg.shots = Some(20_000);
    let r = json(&run("endtoend", &cfg), "report.json");
    let (t, t_run) = (r["T"].as_f64().unwrap(), r["T_run"].as_f64().unwrap());
    // every point is a 20k-shot estimate of the same value
    let sigma = (t * (1.0 - t) / 20_000.0).sqrt();
    assert!((t - t_run).abs() < 4.0 * sigma);
    for p in r["points"].as_array().unwrap() {
        assert!((p[1].as_f64().unwrap() - t).abs() < 4.0 * sigma);
    }
}

#[test]
fn endtoend_sweep_fills_ten_osaka_qubits() {
    let mut cfg = scenario("endtoend");
    cfg.shots = Some(1000);
    let u = json(&run("endtoend", &cfg), "utilization.json");
    assert_eq!(u["qubits_used"], 10);
    assert_eq!(u["chip_size"], 127);
}

#[test]
fn chips_give_different_depths() {
    let out = run("transpile", &scenario("transpile"));
    let a = json(&out, "transpile_nairobi.json");
    let b = json(&out, "transpile_osaka.json");
    assert_ne!(a["depth"], b["depth"]);
}

#[test]
fn hadamard_masses_sum_to_one() {
    let mut cfg = scenario("hadamard");
    cfg.shots = Some(20_000);
    let h = json(&run("hadamard", &cfg), "hadamard.json");
    let total: f64 = ["re", "im"]
        .iter()
        .flat_map(|k| h[*k].as_object().unwrap().values().map(|v| v.as_f64().unwrap()))
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn rem_scenario_improves_barrier_estimate() {
    let r = json(&run("rem", &scenario("rem")), "rem.json");
    let b = &r["barrier"];
    let ideal = b["ideal"].as_f64().unwrap();
    assert!((b["mitigated"].as_f64().unwrap() - ideal).abs() < (b["raw"].as_f64().unwrap() - ideal).abs());
}

#[test]
fn binary_writes_files_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = qtunnel(&[
        "pack",
        "--config",
        scenario_path("pack").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("10/127"));
    assert!(dir.path().join("plan.json").is_file());
}

#[test]
fn seed_and_shots_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = scenario_path("hadamard");
    let c = cfg.to_str().unwrap();
    let read = |sub: &str| fs::read(Path::new(d).join(sub).join("hadamard.json")).unwrap();
    for (sub, seed) in [("a", "1"), ("b", "2")] {
        let o = format!("{d}/{sub}");
        let out = qtunnel(&["hadamard", "--config", c, "--seed", seed, "--shots", "500", "--out", &o]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a: Value = serde_json::from_slice(&read("a")).unwrap();
    assert_eq!(a["shots"], 500);
    assert_ne!(read("a"), read("b"));
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn config_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    let missing = qtunnel(&["simulate", "--config", "/no/such/file.json", "--out", o]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("config error"));

    let bad = write_config(dir.path(), "{ not json");
    assert_eq!(
        qtunnel(&["simulate", "--config", &bad, "--out", o]).status.code(),
        Some(2)
    );

    let no_seed = write_config(
        dir.path(),
        r#"{"n": 2, "L": 2.0, "dt": 0.1, "steps": 2, "mode": "counts", "shots": 100,
            "potential": {"pattern": "x1", "v": 1.0}, "initial": {"kind": "basis", "k": 0}}"#,
    );
    assert_eq!(
        qtunnel(&["simulate", "--config", &no_seed, "--out", o]).status.code(),
        Some(2)
    );
    assert_eq!(
        qtunnel(&["simulate", "--config", &no_seed, "--seed", "4", "--out", o])
            .status
            .code(),
        Some(0)
    );

    let no_chip_file = write_config(
        dir.path(),
        r#"{"n": 2, "L": 2.0, "dt": 0.1, "steps": 2, "chip": "missing_chip.json",
            "potential": {"pattern": "x1", "v": 1.0}, "initial": {"kind": "basis", "k": 0}}"#,
    );
    assert_eq!(
        qtunnel(&["pack", "--config", &no_chip_file, "--out", o]).status.code(),
        Some(2)
    );

    assert_eq!(qtunnel(&["simulate"]).status.code(), Some(2));
}

#[test]
fn pipeline_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // five folded circuits cannot be kept apart on seven qubits
    let cfg = write_config(
        dir.path(),
        r#"{"n": 2, "L": 2.0, "dt": 0.1, "steps": 2, "chip": "nairobi", "buffer": 2,
            "potential": {"pattern": "x1", "v": 1.0}, "initial": {"kind": "basis", "k": 0}}"#,
    );
    let out = qtunnel(&[
        "pack",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn chip_files_resolve_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let chip = qtunnel::transpile::ChipModel::line(4, 0.01).unwrap();
    fs::write(dir.path().join("line.json"), chip.to_json().unwrap()).unwrap();
    let path = write_config(
        dir.path(),
        r#"{"n": 2, "L": 2.0, "dt": 0.1, "steps": 1, "chips": ["line.json"],
            "potential": {"pattern": "x1", "v": 1.0}, "initial": {"kind": "basis", "k": 0}}"#,
    );
    let cfg = ScenarioConfig::load(Path::new(&path)).unwrap();
    let out = run("transpile", &cfg);
    assert!(out.file("transpile_line.json").is_some());
    let mut bad = cfg.clone();
    bad.zne = None;
    assert!(matches!(commands::endtoend(&bad), Err(CliError::Config(_))));
}

#[test]
fn schemas_reject_malformed_documents() {
    let report = r#"{"T": 0.8, "T_run": 0.6, "E1": 0.2, "T_em": 0.79, "points": [], "extrapolator": "richardson"}"#;
    assert!(!schema("mitigation_report").is_valid(&serde_json::from_str(report).unwrap()));
    let counts = r#"{"shots": 10, "counts": {"0a": 10}}"#;
    assert!(!schema("counts").is_valid(&serde_json::from_str(counts).unwrap()));
    let cfg = r#"{"n": 2, "L": 2.0, "dt": 0.1, "steps": 1, "potential": {"pattern": "x1", "v": 1}, "initial": {"kind": "basis", "k": 0}, "extra": 1}"#;
    assert!(!schema("scenario").is_valid(&serde_json::from_str(cfg).unwrap()));
}
