//! Run configuration documents.

use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::calibrate::{CalibrationTarget, Method};
use crate::model::{ModelParams, Resolution};
use crate::red::{red_drop_profile, RedModel};
use crate::sim::SimConfig;

pub const DEFAULT_BUDGET: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Renovation,
    Red,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: serde_json::Value,
    #[serde(default)]
    pub simulation: Option<SimConfig>,
    #[serde(default)]
    pub calibration: Option<CalibrationSection>,
}

/// Renovation parameters; the vector may be left out when calibrating.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenovationSection {
    pub arrival_rate: f64,
    pub service_time: f64,
    pub capacity: usize,
    #[serde(default)]
    pub renovation: Option<Vec<f64>>,
    pub option: Resolution,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedProfile {
    pub min_th: usize,
    pub max_th: usize,
    pub p_max: f64,
}

/// RED parameters: an explicit drop vector or a linear profile.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedSection {
    pub arrival_rate: f64,
    pub service_rate: f64,
    pub capacity: usize,
    #[serde(default)]
    pub drop: Option<Vec<f64>>,
    #[serde(default)]
    pub profile: Option<RedProfile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default)]
    pub target_loss: Option<f64>,
    #[serde(default)]
    pub target_mean_queue: Option<f64>,
    #[serde(default)]
    pub weights: Option<(f64, f64)>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl CalibrationSection {
    pub fn target(&self) -> CalibrationTarget {
        let mut t = CalibrationTarget::new(self.target_loss, self.target_mean_queue);
        if let Some(w) = self.weights {
            t.weights = w;
        }
        t
    }
}

/// The model a configuration describes.
#[derive(Debug, Clone)]
pub enum Model {
    Renovation(RenovationSection),
    Red(RedModel),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let parse_err = |e: serde_json::Error| CliError::Parse(format!("params: {e}"));
        match self.model {
            ModelKind::Renovation => {
                let s: RenovationSection =
                    serde_json::from_value(self.params.clone()).map_err(parse_err)?;
                Ok(Model::Renovation(s))
            }
            ModelKind::Red => {
                let s: RedSection = serde_json::from_value(self.params.clone()).map_err(parse_err)?;
                let drop = match (s.drop, s.profile) {
                    (Some(d), None) => d,
                    (None, Some(p)) => red_drop_profile(p.min_th, p.max_th, p.p_max, s.capacity)?,
                    _ => {
                        return Err(CliError::Validation(
                            "red params need exactly one of `drop` and `profile`".into(),
                        ))
                    }
                };
                Ok(Model::Red(RedModel::new(
                    s.arrival_rate,
                    s.service_rate,
                    s.capacity,
                    drop,
                )?))
            }
        }
    }

    pub fn simulation(&self, seed: Option<u64>, kmax: Option<usize>) -> Result<SimConfig, CliError> {
        let mut sim = self
            .simulation
            .clone()
            .ok_or_else(|| CliError::Validation("config has no `simulation` section".into()))?;
        if let Some(s) = seed {
            sim.seed = s;
        }
        if let Some(k) = kmax {
            sim.kmax = k;
        }
        sim.validate()?;
        Ok(sim)
    }
}

impl RenovationSection {
    /// Full parameters; fails if the renovation vector is missing.
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let q = self
            .renovation
            .clone()
            .ok_or_else(|| CliError::Validation("renovation params need a `renovation` vector".into()))?;
        Ok(ModelParams::new(
            self.arrival_rate,
            self.service_time,
            self.capacity,
            q,
            self.option,
        )?)
    }

    /// Parameters with the renovation vector replaced by the no-renovation
    /// baseline, for calibration.
    pub fn base(&self) -> Result<ModelParams, CliError> {
        let mut q = vec![0.0; self.capacity + 1];
        if let Some(first) = q.first_mut() {
            *first = 1.0;
        }
        Ok(ModelParams::new(
            self.arrival_rate,
            self.service_time,
            self.capacity,
            q,
            self.option,
        )?)
    }
}
