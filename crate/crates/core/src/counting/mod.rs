//! Heralded photon counting: pair generation per pulse, detection losses,
//! dark counts and timing, coincidence histograms and CAR.

mod analytic;
mod car;
mod monte_carlo;
mod preset;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use analytic::{analytic_rates, calibrate_darks, AnalyticRates, CountStatistics, MeanSigma};
pub use car::{car_from_histogram, sweep_power, write_sweep_csv, CarResult, SweepPoint};
pub use monte_carlo::{histogram_from_clicks, simulate_clicks, simulate_clicks_with, simulate_pulses, Click, ClickRecord, CoincidenceHistogram, DEFAULT_BLOCK_PULSES};
pub use preset::{Preset, SweepPlan, PRESET_NAMES};

/// Distribution of the number of pairs created in one pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairStatistics {
    /// Many spectral modes.
    #[default]
    Poisson,
    /// A single spectral mode (geometric distribution).
    Thermal,
}

impl PairStatistics {
    /// Probability generating function E[zⁿ] for mean μ.
    pub fn generating_function(self, mu: f64, z: f64) -> f64 {
        match self {
            PairStatistics::Poisson => (-mu * (1.0 - z)).exp(),
            PairStatistics::Thermal => 1.0 / (1.0 + mu * (1.0 - z)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CountingConfig {
    pub repetition_rate_hz: f64,
    /// Mean pairs per pulse μ.
    pub mean_pairs: f64,
    /// Calibration k in μ = k·P², 1/mW².
    pub pair_rate_per_mw2: Option<f64>,
    pub eta_signal: f64,
    pub eta_idler: f64,
    /// Dark-click probability per pulse slot.
    pub dark_signal: f64,
    pub dark_idler: f64,
    /// RMS jitter of the signal–idler delay, ns. Each detector contributes
    /// σ/√2.
    pub jitter_ns: f64,
    pub bin_width_ns: f64,
    pub statistics: PairStatistics,
    /// Correlation window in pulse periods on each side of zero delay.
    pub window_periods: u32,
    /// Non-paralysable dead time per detector, ns.
    pub dead_time_ns: f64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        CountingConfig {
            repetition_rate_hz: 1e7,
            mean_pairs: 0.0,
            pair_rate_per_mw2: None,
            eta_signal: 1.0,
            eta_idler: 1.0,
            dark_signal: 0.0,
            dark_idler: 0.0,
            jitter_ns: 0.3,
            bin_width_ns: 2.5,
            statistics: PairStatistics::Poisson,
            window_periods: 5,
            dead_time_ns: 0.0,
        }
    }
}

fn probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} = {p} must lie in [0, 1]")))
    }
}

impl CountingConfig {
    pub fn period_ns(&self) -> f64 {
        1e9 / self.repetition_rate_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.repetition_rate_hz > 0.0 && self.repetition_rate_hz.is_finite()) {
            return Err(Error::validation("repetition rate must be positive"));
        }
        if !(self.mean_pairs >= 0.0 && self.mean_pairs <= 100.0) {
            return Err(Error::validation(format!("mean pairs per pulse {} must lie in [0, 100]", self.mean_pairs)));
        }
        if let Some(k) = self.pair_rate_per_mw2 {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::validation("pair-rate calibration k must be positive"));
            }
        }
        probability("eta_signal", self.eta_signal)?;
        probability("eta_idler", self.eta_idler)?;
        probability("dark_signal", self.dark_signal)?;
        probability("dark_idler", self.dark_idler)?;
        if !(self.jitter_ns >= 0.0 && self.jitter_ns.is_finite()) {
            return Err(Error::validation("jitter must be non-negative"));
        }
        if !(self.bin_width_ns > 0.0 && self.bin_width_ns < self.period_ns()) {
            return Err(Error::validation("bin width must be positive and shorter than the pulse period"));
        }
        if self.window_periods < 3 {
            return Err(Error::validation("correlation window must span at least three periods on each side"));
        }
        if !(self.dead_time_ns >= 0.0 && self.dead_time_ns.is_finite()) {
            return Err(Error::validation("dead time must be non-negative"));
        }
        Ok(())
    }

    /// Copy with μ = k·P² for average pump power `power_mw`.
    pub fn at_power(&self, power_mw: f64) -> Result<CountingConfig> {
        let k = self.pair_rate_per_mw2.ok_or_else(|| Error::validation("pair-rate calibration k is not set"))?;
        if !(power_mw > 0.0 && power_mw.is_finite()) {
            return Err(Error::validation(format!("pump power {power_mw} mW must be positive")));
        }
        Ok(CountingConfig { mean_pairs: k * power_mw * power_mw, ..self.clone() })
    }
}
