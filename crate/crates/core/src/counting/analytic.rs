use serde::{Deserialize, Serialize};

use super::CountingConfig;
use crate::numeric::bisect;
use crate::{Error, Result};

/// Closed-form click and coincidence rates of a gated two-detector setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRates {
    /// Per-slot click probabilities.
    pub p_signal: f64,
    pub p_idler: f64,
    /// Both detectors click in the same slot.
    pub p_coincidence: f64,
    /// Rates, 1/s.
    pub singles_signal: f64,
    pub singles_idler: f64,
    /// Zero-delay peak, true and accidental.
    pub coincidences: f64,
    /// One off-zero peak.
    pub accidentals: f64,
    pub car: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSigma {
    pub mean: f64,
    pub sigma: f64,
}

impl MeanSigma {
    /// Distance of `x` from the mean in units of sigma.
    pub fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sigma
    }
}

/// Expected counts and their standard deviations for a run of fixed length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStatistics {
    pub singles_signal: MeanSigma,
    pub singles_idler: MeanSigma,
    /// Counts in the zero-delay peak.
    pub coincidences: MeanSigma,
    /// Mean count per off-zero peak.
    pub accidentals: MeanSigma,
}

/// Per-slot click probabilities from the pair-number generating function G:
/// P(no signal click) = G(1 − η_s)·(1 − d_s), P(neither) =
/// G((1 − η_s)(1 − η_i))·(1 − d_s)(1 − d_i).
pub fn analytic_rates(config: &CountingConfig) -> Result<AnalyticRates> {
    config.validate()?;
    let g = |z: f64| config.statistics.generating_function(config.mean_pairs, z);
    let (a, b) = (1.0 - config.eta_signal, 1.0 - config.eta_idler);
    let (qs, qi) = (1.0 - config.dark_signal, 1.0 - config.dark_idler);
    let none_s = g(a) * qs;
    let none_i = g(b) * qi;
    let neither = g(a * b) * qs * qi;
    let p_signal = 1.0 - none_s;
    let p_idler = 1.0 - none_i;
    let p_coincidence = 1.0 - none_s - none_i + neither;
    let r = config.repetition_rate_hz;
    let acc = p_signal * p_idler;
    Ok(AnalyticRates {
        p_signal,
        p_idler,
        p_coincidence,
        singles_signal: p_signal * r,
        singles_idler: p_idler * r,
        coincidences: p_coincidence * r,
        accidentals: acc * r,
        car: if acc > 0.0 { (p_coincidence - acc) / acc } else { f64::INFINITY },
    })
}

impl AnalyticRates {
    /// Count statistics for `n_pulses` slots and a ±`window_periods`
    /// correlation window.
    ///
    /// The off-zero peaks share clicks, so their sum is not Poisson; the
    /// variance below sums the covariances of all slot-pair products that
    /// share a slot.
    pub fn count_statistics(&self, n_pulses: u64, window_periods: u32) -> CountStatistics {
        let n = n_pulses as f64;
        let (ps, pi, pc) = (self.p_signal, self.p_idler, self.p_coincidence);
        let binomial = |p: f64| MeanSigma { mean: n * p, sigma: (n * p * (1.0 - p)).sqrt() };

        let s = 2.0 * window_periods as f64;
        let q = ps * pi;
        let pairs: f64 = (1..=window_periods as u64).map(|k| 2.0 * (n - k as f64).max(0.0)).sum();
        let var_per_slot = s * q * (1.0 - q)
            + s * (s - 1.0) * (ps * pi * pi * (1.0 - ps) + ps * ps * pi * (1.0 - pi))
            + 2.0 * s * (s - 1.0) * q * (pc - q)
            + s * (pc * pc - q * q);
        CountStatistics {
            singles_signal: binomial(ps),
            singles_idler: binomial(pi),
            coincidences: binomial(pc),
            accidentals: MeanSigma { mean: pairs * q / s, sigma: (n * var_per_slot).max(0.0).sqrt() / s },
        }
    }
}

/// Dark-click probabilities that put the small-μ CAR maximum at a
/// coincidence rate `target_cc_per_s` with height `target_car`.
///
/// For μ ≪ 1, CAR ≈ μη_sη_i / ((μη_s + d_s)(μη_i + d_i)), which peaks at
/// μ*² = d_s·d_i/(η_sη_i). Writing d_s = x·μ*η_s and d_i = μ*η_i/x fixes the
/// peak position; x ∈ (0, 1] is then solved so the exact CAR at μ* equals the
/// target. x < 1 assigns the quieter detector to the signal arm. μ* itself is
/// iterated until the zero-delay rate at μ* equals the target.
pub fn calibrate_darks(config: &CountingConfig, target_cc_per_s: f64, target_car: f64) -> Result<CountingConfig> {
    config.validate()?;
    if !(target_cc_per_s > 0.0 && target_car > 0.0) {
        return Err(Error::validation("calibration targets must be positive"));
    }
    let (es, ei) = (config.eta_signal, config.eta_idler);
    if es == 0.0 || ei == 0.0 {
        return Err(Error::validation("calibration needs non-zero efficiencies"));
    }
    let with = |mu: f64, x: f64| CountingConfig { mean_pairs: mu, dark_signal: x * mu * es, dark_idler: mu * ei / x, ..config.clone() };
    let car_at = |mu: f64, x: f64| analytic_rates(&with(mu, x)).map(|r| r.car);

    let mut mu = target_cc_per_s / (config.repetition_rate_hz * es * ei);
    let mut x = 1.0;
    for _ in 0..50 {
        let best = car_at(mu, 1.0)?;
        if best < target_car {
            return Err(Error::validation(format!("a CAR of {target_car} is unreachable at this rate (at most {best:.3})")));
        }
        // d_i = μη_i/x stays a probability
        let floor = (2.0 * mu * ei).min(0.5);
        x = bisect(|x| Ok(car_at(mu, x)? - target_car), floor, 1.0, 0.0, 0.0)?.root;
        let cc = |m: f64| Ok(analytic_rates(&with(m, x))?.coincidences - target_cc_per_s);
        let next = bisect(cc, 1e-3 * mu, (10.0 * mu).min(1.0), 0.0, 0.0)?.root;
        let done = ((next - mu) / mu).abs() < 1e-13;
        mu = next;
        if done {
            break;
        }
    }
    let out = with(mu, x);
    out.validate()?;
    Ok(CountingConfig { mean_pairs: config.mean_pairs, ..out })
}
