use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CountingConfig;
use crate::{Error, Result};

/// Names accepted by [`Preset::builtin`].
pub const PRESET_NAMES: [&str; 1] = ["paper_replica"];

const PAPER_REPLICA: &str = include_str!("../../../../presets/paper_replica.json");

/// Pump powers and run length of a CAR sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub start_mw: f64,
    pub stop_mw: f64,
    pub points: usize,
    /// Logarithmic rather than linear spacing.
    #[serde(default)]
    pub log_spaced: bool,
    pub pulses_per_point: u64,
    /// Integration halfwidth of each histogram peak, ns.
    pub peak_halfwidth_ns: f64,
}

impl SweepPlan {
    pub fn powers_mw(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start_mw];
        }
        (0..self.points)
            .map(|k| {
                let f = k as f64 / (self.points - 1) as f64;
                if self.log_spaced {
                    self.start_mw * (self.stop_mw / self.start_mw).powf(f)
                } else {
                    self.start_mw + f * (self.stop_mw - self.start_mw)
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_mw > 0.0 && self.stop_mw >= self.start_mw && self.points >= 1 && self.pulses_per_point >= 1) {
            return Err(Error::validation("sweep needs 0 < start ≤ stop, at least one point and one pulse"));
        }
        if !(self.peak_halfwidth_ns > 0.0) {
            return Err(Error::validation("peak halfwidth must be positive"));
        }
        Ok(())
    }
}

/// A named counting configuration with its sweep plan. Assumed values and
/// their calibration are described in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub counting: CountingConfig,
    pub sweep: SweepPlan,
    #[serde(default)]
    pub seed: u64,
}

impl Preset {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Preset = serde_json::from_str(text)?;
        p.counting.validate()?;
        p.sweep.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "paper_replica" => Self::from_json(PAPER_REPLICA),
            _ => Err(Error::validation(format!("unknown preset '{name}' (known: {})", PRESET_NAMES.join(", ")))),
        }
    }

    /// A built-in name, or else a path to a preset file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if PRESET_NAMES.contains(&name_or_path) {
            Self::builtin(name_or_path)
        } else {
            Self::load(name_or_path)
        }
    }
}
