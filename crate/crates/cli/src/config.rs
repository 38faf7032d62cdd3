//! Scenario files: one JSON document describing a whole run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qtunnel::mitigate::{RemMode, ZneConfig};
use qtunnel::transpile::{ChipModel, TranspileOptions};
use qtunnel::tunnel::{Discretization, PotentialSpec, TrotterConfig, WavepacketSpec};
use qtunnel::workflow::NoiseParams;

use crate::error::CliError;

/// How `simulate` turns states into the timeline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    Counts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(default)]
    pub origin: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub order: u8,
    #[serde(default)]
    pub use_ancilla: bool,
    #[serde(default)]
    pub paper_faithful: bool,
    pub potential: PotentialSpec,
    pub initial: WavepacketSpec,
    #[serde(default)]
    pub mode: Mode,
    /// Built-in chip name or a chip file path (relative to the scenario file).
    #[serde(default)]
    pub chip: Option<String>,
    /// Targets for `transpile`; both shipped chips when empty.
    #[serde(default)]
    pub chips: Vec<String>,
    #[serde(default)]
    pub noise: NoiseParams,
    /// Symmetric per-qubit flip probability for `rem`, overriding chip readout data.
    #[serde(default)]
    pub readout_flip: Option<f64>,
    #[serde(default)]
    pub zne: Option<ZneConfig>,
    #[serde(default)]
    pub rem: Option<RemMode>,
    #[serde(default = "yes")]
    pub multiprogram: bool,
    #[serde(default = "default_buffer")]
    pub buffer: usize,
    #[serde(default)]
    pub transpile: TranspileOptions,
    /// Bitstrings summed into the transmission.
    #[serde(default)]
    pub transmission: Vec<String>,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Also write `timeline.pgm`.
    #[serde(default)]
    pub pgm: bool,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> u8 {
    1
}

fn yes() -> bool {
    true
}

fn default_buffer() -> usize {
    qtunnel::multiprog::DEFAULT_BUFFER
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.shots.is_some() {
            self.shots = o.shots;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.to_string_lossy().into_owned());
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.discretization()?;
        self.trotter().validate().map_err(CliError::config)?;
        self.potential.validate(self.n).map_err(CliError::config)?;
        if let Some(z) = &self.zne {
            z.validate().map_err(CliError::config)?;
        }
        for (what, p) in [("p1", self.noise.p1), ("p2", self.noise.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::config(format!("noise {what} = {p} outside [0, 1]")));
            }
        }
        if let Some(f) = self.readout_flip {
            if !(0.0..0.5).contains(&f) {
                return Err(CliError::config(format!("readout_flip {f} outside [0, 0.5)")));
            }
        }
        for s in &self.transmission {
            if s.len() != self.n || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(CliError::config(format!(
                    "transmission state {s:?} is not an {}-bit string",
                    self.n
                )));
            }
        }
        if self.shots == Some(0) {
            return Err(CliError::config("shots must be at least 1"));
        }
        Ok(())
    }

    pub fn discretization(&self) -> Result<Discretization, CliError> {
        Discretization::new(self.n, self.length)
            .map(|d| d.with_origin(self.origin))
            .map_err(CliError::config)
    }

    pub fn trotter(&self) -> TrotterConfig {
        TrotterConfig {
            dt: self.dt,
            steps: self.steps,
            order: self.order,
            use_ancilla: self.use_ancilla,
            paper_faithful: self.paper_faithful,
        }
    }

    /// Seed for sampling runs; a sampling run without one is a config error.
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::config("this run samples shots and needs a seed (config `seed` or --seed)"))
    }

    pub fn require_shots(&self) -> Result<u64, CliError> {
        self.shots
            .ok_or_else(|| CliError::config("this run samples shots and needs `shots` (config or --shots)"))
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.out.as_deref().unwrap_or("results"))
    }

    fn resolve_chip(&self, spec: &str) -> Result<ChipModel, CliError> {
        if let Some(c) = ChipModel::builtin(spec) {
            return Ok(c);
        }
        let path = self.base_dir.join(spec);
        if !path.is_file() {
            return Err(CliError::config(format!(
                "chip {spec:?} is neither built in nor a file"
            )));
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        ChipModel::from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn chip(&self) -> Result<ChipModel, CliError> {
        let spec = self
            .chip
            .as_deref()
            .ok_or_else(|| CliError::config("scenario names no `chip`"))?;
        self.resolve_chip(spec)
    }

    /// Transpile targets with their configured names.
    pub fn target_chips(&self) -> Result<Vec<(String, ChipModel)>, CliError> {
        let names: Vec<String> = if self.chips.is_empty() {
            vec!["nairobi".into(), "osaka".into()]
        } else {
            self.chips.clone()
        };
        names
            .into_iter()
            .map(|s| {
                let c = self.resolve_chip(&s)?;
                Ok((s, c))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "n": 2, "L": 2.194, "dt": 0.1, "steps": 3,
        "potential": {"pattern": "x1", "v": 1.0},
        "initial": {"kind": "basis", "k": 0}
    }"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.order, 1);
        assert_eq!(c.mode, Mode::Exact);
        assert!(c.multiprogram);
        assert_eq!(c.buffer, 2);
        assert!(c.seed.is_none());
        assert!(c.require_seed().is_err());
        assert_eq!(c.out_dir(), PathBuf::from("results"));
    }

    #[test]
    fn unknown_fields_and_bad_values_are_config_errors() {
        let extra = MINIMAL.replace("\"steps\": 3", "\"steps\": 3, \"stpes\": 4");
        assert!(matches!(ScenarioConfig::parse(&extra), Err(CliError::Config(_))));
        let bad = MINIMAL.replace("\"dt\": 0.1", "\"dt\": -0.1");
        assert!(matches!(ScenarioConfig::parse(&bad), Err(CliError::Config(_))));
        let pat = MINIMAL.replace("\"x1\"", "\"x1x\"");
        assert!(matches!(ScenarioConfig::parse(&pat), Err(CliError::Config(_))));
        let tr = MINIMAL.replace("\"steps\": 3", "\"steps\": 3, \"transmission\": [\"101\"]");
        assert!(matches!(ScenarioConfig::parse(&tr), Err(CliError::Config(_))));
    }

    #[test]
    fn overrides_win() {
        let mut c = ScenarioConfig::parse(MINIMAL).unwrap();
        c.apply(&Overrides {
            seed: Some(9),
            shots: Some(100),
            out: Some(PathBuf::from("/tmp/x")),
        });
        assert_eq!(c.require_seed().unwrap(), 9);
        assert_eq!(c.require_shots().unwrap(), 100);
        assert_eq!(c.out_dir(), PathBuf::from("/tmp/x"));
    }

    #[test]
    fn chips_resolve_by_name_or_fail() {
        let mut c = ScenarioConfig::parse(MINIMAL).unwrap();
        assert!(c.chip().is_err());
        c.chip = Some("osaka".into());
        assert_eq!(c.chip().unwrap().num_qubits, 127);
        c.chip = Some("no/such/chip.json".into());
        assert!(matches!(c.chip(), Err(CliError::Config(_))));
        let t = ScenarioConfig::parse(MINIMAL).unwrap().target_chips().unwrap();
        assert_eq!(t.len(), 2);
    }
}
