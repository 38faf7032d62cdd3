//! Zero-noise extrapolation and readout error mitigation.

mod folding;
mod rem;
mod zne;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use folding::{fold_count, fold_local};
pub use rem::{
    apply_rem, apply_rem_probabilities, build_confusion_matrix, calibration_circuit, ConfusionMatrix, RemMode,
    RemResult, MAX_REM_QUBITS,
};
pub use zne::{extrapolate, zne_estimate, Extrapolator, Folding, ZneConfig, ZneResult};

/// Ideal, raw and mitigated transmission with their errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "T_run")]
    pub t_run: f64,
    /// `T − T_run`.
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "T_em")]
    pub t_em: f64,
    /// `|T − T_em|`.
    #[serde(rename = "E2")]
    pub e2: f64,
    pub points: Vec<(f64, f64)>,
    pub extrapolator: String,
}

impl MitigationReport {
    pub fn new(t: f64, t_run: f64, t_em: f64, points: Vec<(f64, f64)>, extrapolator: Extrapolator) -> Self {
        MitigationReport {
            t,
            t_run,
            e1: t - t_run,
            t_em,
            e2: (t - t_em).abs(),
            points,
            extrapolator: extrapolator.to_string(),
        }
    }

    /// Recomputes E1 and E2 from the other fields.
    pub fn check(&self) -> Result<()> {
        let ok =
            (self.e1 - (self.t - self.t_run)).abs() < 1e-12 && (self.e2 - (self.t - self.t_em).abs()).abs() < 1e-12;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("E1/E2 disagree with T, T_run, T_em".into()))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: MitigationReport = serde_json::from_str(s)?;
        r.check()?;
        Ok(r)
    }
}
