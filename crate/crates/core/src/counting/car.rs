use std::io::Write;

use serde::{Deserialize, Serialize};

use super::monte_carlo::{simulate_pulses, CoincidenceHistogram};
use super::CountingConfig;
use crate::{Error, Result};

/// Poisson upper limit (≈95%) on the mean when zero events are observed.
const ZERO_COUNT_UPPER_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarResult {
    /// Zero-delay peak rate, 1/s, accidentals included.
    pub n_c: f64,
    /// Mean off-zero peak rate, 1/s.
    pub n_a: f64,
    /// (N_C − N_A)/N_A.
    pub car: f64,
    pub car_sigma: f64,
    /// No accidentals were recorded; `n_a` is the zero-count upper limit and
    /// `car` a lower bound.
    pub lower_bound: bool,
    pub central_counts: u64,
    pub side_peak_counts: Vec<u64>,
}

/// Sums the bins whose centres lie within `halfwidth` of `center`.
fn peak_integral(hist: &CoincidenceHistogram, center: f64, halfwidth: f64) -> u64 {
    let slack = 1e-9 * hist.bin_width_ns();
    hist.bin_centers_ns()
        .iter()
        .zip(&hist.counts)
        .filter(|(c, _)| (**c - center).abs() <= halfwidth + slack)
        .map(|(_, n)| n)
        .sum()
}

/// CAR from the zero-delay peak and the mean of the off-zero peaks, each
/// integrated over ±`peak_halfwidth_ns`.
pub fn car_from_histogram(hist: &CoincidenceHistogram, peak_halfwidth_ns: f64) -> Result<CarResult> {
    let period = hist.period_ns;
    if !(peak_halfwidth_ns > 0.0 && peak_halfwidth_ns < 0.5 * period) {
        return Err(Error::validation("peak halfwidth must be positive and below half a period"));
    }
    let (lo, hi) = (hist.edges_ns[0], hist.edges_ns[hist.edges_ns.len() - 1]);
    let mut side = Vec::new();
    let mut k = 1.0;
    while -k * period - peak_halfwidth_ns >= lo - 1e-9 && k * period + peak_halfwidth_ns <= hi + 1e-9 {
        side.push(peak_integral(hist, -k * period, peak_halfwidth_ns));
        side.push(peak_integral(hist, k * period, peak_halfwidth_ns));
        k += 1.0;
    }
    if side.len() < 6 {
        return Err(Error::validation("histogram must cover at least three pulse periods on each side"));
    }
    let c = peak_integral(hist, 0.0, peak_halfwidth_ns);
    let a_total: u64 = side.iter().sum();
    if c == 0 && a_total == 0 {
        return Err(Error::NoCounts);
    }
    let s = side.len() as f64;
    let t = hist.acquisition_time_s;
    let (a, lower_bound) = if a_total == 0 { (ZERO_COUNT_UPPER_LIMIT / s, true) } else { (a_total as f64 / s, false) };
    let n_c = c as f64 / t;
    let n_a = a / t;
    let cf = c as f64;
    let car_sigma = if lower_bound { cf.sqrt() / a } else { (cf + cf * cf / a_total as f64).sqrt() / a };
    Ok(CarResult { n_c, n_a, car: (n_c - n_a) / n_a, car_sigma, lower_bound, central_counts: c, side_peak_counts: side })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub power_mw: f64,
    pub mean_pairs: Option<f64>,
    pub car: Option<CarResult>,
    pub error: Option<String>,
}

fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Monte Carlo CAR and coincidence rate at each pump power, μ = k·P².
/// Points are sorted by power; a failing point is recorded and the sweep
/// continues.
pub fn sweep_power(config: &CountingConfig, powers_mw: &[f64], n_pulses: u64, seed: u64, peak_halfwidth_ns: f64) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    if config.pair_rate_per_mw2.is_none() {
        return Err(Error::validation("a power sweep needs the pair-rate calibration k"));
    }
    let mut powers = powers_mw.to_vec();
    powers.sort_by(f64::total_cmp);
    Ok(powers
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let run = || -> Result<(f64, CarResult)> {
                let c = config.at_power(p)?;
                let hist = simulate_pulses(&c, n_pulses, point_seed(seed, k))?;
                Ok((c.mean_pairs, car_from_histogram(&hist, peak_halfwidth_ns)?))
            };
            match run() {
                Ok((mu, car)) => SweepPoint { power_mw: p, mean_pairs: Some(mu), car: Some(car), error: None },
                Err(e) => SweepPoint { power_mw: p, mean_pairs: None, car: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}

/// Writes `power_mw,cc_per_s,car,car_sigma`; failed points leave the last
/// three fields empty.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["power_mw", "cc_per_s", "car", "car_sigma"])?;
    for p in points {
        match &p.car {
            Some(c) => w.write_record([p.power_mw.to_string(), c.n_c.to_string(), c.car.to_string(), c.car_sigma.to_string()])?,
            None => w.write_record([p.power_mw.to_string(), String::new(), String::new(), String::new()])?,
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(central: u64, side: u64) -> CoincidenceHistogram {
        let c = CountingConfig::default();
        let mut h = CoincidenceHistogram::empty(&c, c.repetition_rate_hz as u64);
        let z = h.bin_of(0.0).unwrap();
        h.counts[z] = central;
        for k in 1..=5 {
            for sign in [-1.0, 1.0] {
                let b = h.bin_of(sign * k as f64 * 100.0).unwrap();
                h.counts[b] = side;
            }
        }
        h
    }

    #[test]
    fn car_arithmetic() {
        let r = car_from_histogram(&synthetic(71, 1), 1.25).unwrap();
        assert_eq!(r.car, 70.0);
        assert_eq!(r.car, (r.n_c - r.n_a) / r.n_a);
        assert_eq!(car_from_histogram(&synthetic(9, 9), 1.25).unwrap().car, 0.0);
    }

    #[test]
    fn empty_side_peaks_give_lower_bound() {
        let r = car_from_histogram(&synthetic(40, 0), 1.25).unwrap();
        assert!(r.lower_bound);
        assert_eq!(r.car, (r.n_c - r.n_a) / r.n_a);
        assert!(matches!(car_from_histogram(&synthetic(0, 0), 1.25), Err(Error::NoCounts)));
    }

    #[test]
    fn histogram_must_cover_three_periods() {
        let c = CountingConfig { window_periods: 3, ..Default::default() };
        let mut h = CoincidenceHistogram::empty(&c, 1);
        assert!(matches!(car_from_histogram(&h, 1.25), Err(Error::NoCounts)));
        assert!(matches!(car_from_histogram(&h, 60.0), Err(Error::Validation(_))));
        // drop the outermost period on each side
        h.edges_ns = h.edges_ns[40..h.edges_ns.len() - 40].to_vec();
        h.counts = h.counts[40..h.counts.len() - 40].to_vec();
        assert!(matches!(car_from_histogram(&h, 1.25), Err(Error::Validation(_))));
    }
}
