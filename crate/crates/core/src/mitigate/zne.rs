use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

use super::fold_local;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extrapolator {
    /// Interpolating polynomial through every point.
    Richardson,
    /// Least-squares polynomial of the given degree.
    Polynomial { degree: usize },
}

impl fmt::Display for Extrapolator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extrapolator::Richardson => write!(f, "richardson"),
            Extrapolator::Polynomial { degree } => write!(f, "polynomial({degree})"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Folding {
    #[default]
    Local,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZneConfig {
    #[serde(default = "default_scales")]
    pub scale_factors: Vec<f64>,
    #[serde(default = "default_extrapolator")]
    pub extrapolator: Extrapolator,
    #[serde(default)]
    pub folding: Folding,
}

fn default_scales() -> Vec<f64> {
    vec![1.0, 1.5, 2.0, 2.5, 3.0]
}

fn default_extrapolator() -> Extrapolator {
    Extrapolator::Richardson
}

impl Default for ZneConfig {
    fn default() -> Self {
        ZneConfig {
            scale_factors: default_scales(),
            extrapolator: default_extrapolator(),
            folding: Folding::Local,
        }
    }
}

impl ZneConfig {
    pub fn new(scale_factors: Vec<f64>, extrapolator: Extrapolator) -> Self {
        ZneConfig {
            scale_factors,
            extrapolator,
            folding: Folding::Local,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scale_factors;
        if s.len() < 2 {
            return Err(Error::InvalidArgument("ZNE needs at least two scale factors".into()));
        }
        if s[0] != 1.0 {
            return Err(Error::InvalidArgument(format!(
                "first scale factor must be 1.0, got {}",
                s[0]
            )));
        }
        if s.windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
            || s.iter().any(|x| !x.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "scale factors {s:?} must be finite and strictly ascending"
            )));
        }
        if let Extrapolator::Polynomial { degree } = self.extrapolator {
            if degree >= s.len() {
                return Err(Error::InvalidArgument(format!(
                    "polynomial degree {degree} needs more than {} scale factors",
                    s.len()
                )));
            }
        }
        Ok(())
    }
}

/// Value at λ = 0 of the chosen fit through `points` = (λ, E).
pub fn extrapolate(points: &[(f64, f64)], extrapolator: Extrapolator) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Extrapolation("need at least two points".into()));
    }
    for (i, a) in points.iter().enumerate() {
        if !(a.0.is_finite() && a.1.is_finite()) {
            return Err(Error::Extrapolation(format!("non-finite point {a:?}")));
        }
        if points[..i].iter().any(|b| (a.0 - b.0).abs() < 1e-12) {
            return Err(Error::Extrapolation(format!("repeated scale factor {}", a.0)));
        }
    }
    match extrapolator {
        Extrapolator::Richardson => {
            // Lagrange basis evaluated at zero
            let mut total = 0.0;
            for (i, &(xi, yi)) in points.iter().enumerate() {
                let mut w = 1.0;
                for (j, &(xj, _)) in points.iter().enumerate() {
                    if i != j {
                        w *= xj / (xj - xi);
                    }
                }
                total += w * yi;
            }
            Ok(total)
        }
        Extrapolator::Polynomial { degree } => {
            if degree >= points.len() {
                return Err(Error::Extrapolation(format!(
                    "degree {degree} fit needs more than {} points",
                    points.len()
                )));
            }
            let a = DMatrix::from_fn(points.len(), degree + 1, |r, c| points[r].0.powi(c as i32));
            let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
            let coef = a
                .svd(true, true)
                .solve(&b, 1e-14)
                .map_err(|e| Error::Extrapolation(e.to_string()))?;
            Ok(coef[0])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZneResult {
    pub value: f64,
    /// `(λ, E(λ))` for every scale factor.
    pub points: Vec<(f64, f64)>,
    pub extrapolator: Extrapolator,
}

/// Folds `circuit` at every scale factor, evaluates each with `executor` and
/// extrapolates to zero noise.
pub fn zne_estimate<F>(mut executor: F, circuit: &Circuit, config: &ZneConfig) -> Result<ZneResult>
where
    F: FnMut(&Circuit) -> Result<f64>,
{
    config.validate()?;
    let mut points = Vec::with_capacity(config.scale_factors.len());
    for &lambda in &config.scale_factors {
        let folded = fold_local(circuit, lambda)?;
        let e = executor(&folded)?;
        points.push((lambda, e));
    }
    Ok(ZneResult {
        value: extrapolate(&points, config.extrapolator)?,
        points,
        extrapolator: config.extrapolator,
    })
}
