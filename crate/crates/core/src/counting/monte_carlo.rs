use std::io::Write;

use rand::{Rng, RngExt, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CountingConfig, PairStatistics};
use crate::{Error, Result};

/// Pulses per work unit. Results do not depend on it.
pub const DEFAULT_BLOCK_PULSES: u64 = 1 << 18;

/// One detector click: pulse slot and timing offset from the slot, ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Click {
    pub slot: u64,
    pub offset_ns: f64,
}

impl Click {
    fn time_ns(&self, period_ns: f64) -> f64 {
        self.slot as f64 * period_ns + self.offset_ns
    }
}

/// Time-ordered clicks of both detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub pulses: u64,
    pub signal: Vec<Click>,
    pub idler: Vec<Click>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    /// Bin edges of the idler − signal delay, ns; one more than `counts`.
    pub edges_ns: Vec<f64>,
    pub counts: Vec<u64>,
    pub acquisition_time_s: f64,
    pub pulses: u64,
    pub period_ns: f64,
    pub singles_signal: u64,
    pub singles_idler: u64,
}

impl CoincidenceHistogram {
    /// Empty histogram for `config`: bins of the configured width centred on
    /// zero delay, reaching half a bin past ±W periods.
    pub fn empty(config: &CountingConfig, pulses: u64) -> Self {
        let bw = config.bin_width_ns;
        let reach = config.window_periods as f64 * config.period_ns();
        let half_bins = (reach / bw).round() as i64;
        let n = (2 * half_bins + 1) as usize;
        let edges_ns = (0..=n).map(|k| (k as i64 - half_bins) as f64 * bw - 0.5 * bw).collect();
        CoincidenceHistogram {
            edges_ns,
            counts: vec![0; n],
            acquisition_time_s: pulses as f64 / config.repetition_rate_hz,
            pulses,
            period_ns: config.period_ns(),
            singles_signal: 0,
            singles_idler: 0,
        }
    }

    pub fn bin_width_ns(&self) -> f64 {
        self.edges_ns[1] - self.edges_ns[0]
    }

    pub fn bin_centers_ns(&self) -> Vec<f64> {
        self.edges_ns.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    /// Bin index holding `delay_ns`, if inside the histogram.
    pub fn bin_of(&self, delay_ns: f64) -> Option<usize> {
        let first = self.edges_ns[0];
        let k = ((delay_ns - first) / self.bin_width_ns()).floor();
        if k >= 0.0 && (k as usize) < self.counts.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes `bin_center_ns,counts`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_center_ns", "counts"])?;
        for (c, n) in self.bin_centers_ns().iter().zip(&self.counts) {
            w.write_record([c.to_string(), n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Key of the random stream of one pulse slot.
fn stream_key(seed: u64) -> u64 {
    Pcg64Mcg::seed_from_u64(seed).next_u64()
}

/// Pair-number and dark-count sampler for one configuration.
struct PulseModel {
    stats: PairStatistics,
    mu: f64,
    p0: f64,
    quiet: f64,
    eta_s: f64,
    eta_i: f64,
    d_s: f64,
    d_i: f64,
    jitter: f64,
}

impl PulseModel {
    fn new(c: &CountingConfig) -> Self {
        let p0 = c.statistics.generating_function(c.mean_pairs, 0.0);
        PulseModel {
            stats: c.statistics,
            mu: c.mean_pairs,
            p0,
            quiet: p0 * (1.0 - c.dark_signal) * (1.0 - c.dark_idler),
            eta_s: c.eta_signal,
            eta_i: c.eta_idler,
            d_s: c.dark_signal,
            d_i: c.dark_idler,
            jitter: c.jitter_ns / std::f64::consts::SQRT_2,
        }
    }

    /// Pair number n ≥ 1 by inversion, given u ≥ P(0).
    fn pairs_above_zero(&self, u: f64) -> u32 {
        let (mut n, mut pmf, mut cdf) = (0u32, self.p0, self.p0);
        // the thermal ratio between successive terms is constant
        let r = self.mu / (1.0 + self.mu);
        while cdf <= u {
            n += 1;
            pmf *= match self.stats {
                PairStatistics::Poisson => self.mu / n as f64,
                PairStatistics::Thermal => r,
            };
            if pmf == 0.0 {
                break;
            }
            cdf += pmf;
        }
        n.max(1)
    }

    /// Whether the signal and idler detectors click in one slot.
    ///
    /// A single uniform decides the common case of no pairs and no darks;
    /// everything else draws further variates from the same stream.
    fn sample(&self, rng: &mut Pcg64Mcg) -> (bool, bool) {
        let u: f64 = rng.random();
        if u < self.quiet {
            return (false, false);
        }
        if u < self.p0 {
            // no pairs, at least one dark click
            let (a, b) = (self.d_s * (1.0 - self.d_i), (1.0 - self.d_s) * self.d_i);
            let v = (u - self.quiet) / (self.p0 - self.quiet) * (1.0 - (1.0 - self.d_s) * (1.0 - self.d_i));
            return if v < a {
                (true, false)
            } else if v < a + b {
                (false, true)
            } else {
                (true, true)
            };
        }
        let n = self.pairs_above_zero(u) as i32;
        let s = rng.random::<f64>() < 1.0 - (1.0 - self.eta_s).powi(n) || rng.random::<f64>() < self.d_s;
        let i = rng.random::<f64>() < 1.0 - (1.0 - self.eta_i).powi(n) || rng.random::<f64>() < self.d_i;
        (s, i)
    }

    fn offset(&self, rng: &mut Pcg64Mcg) -> f64 {
        if self.jitter == 0.0 {
            0.0
        } else {
            self.jitter * rng.sample::<f64, _>(StandardNormal)
        }
    }
}

fn simulate_block(model: &PulseModel, key: u64, slots: std::ops::Range<u64>) -> (Vec<Click>, Vec<Click>) {
    let (mut sig, mut idl) = (Vec::new(), Vec::new());
    for slot in slots {
        let mut rng = Pcg64Mcg::seed_from_u64(key ^ slot);
        let (s, i) = model.sample(&mut rng);
        if s {
            sig.push(Click { slot, offset_ns: model.offset(&mut rng) });
        }
        if i {
            idl.push(Click { slot, offset_ns: model.offset(&mut rng) });
        }
    }
    (sig, idl)
}

fn apply_dead_time(clicks: Vec<Click>, dead_ns: f64, period_ns: f64) -> Vec<Click> {
    if dead_ns == 0.0 {
        return clicks;
    }
    let mut last = f64::NEG_INFINITY;
    clicks
        .into_iter()
        .filter(|c| {
            let t = c.time_ns(period_ns);
            if t - last >= dead_ns {
                last = t;
                true
            } else {
                false
            }
        })
        .collect()
}

/// Click streams of `n_pulses` slots. Every slot has its own random stream
/// derived from (seed, slot), so the result does not depend on `block`.
pub fn simulate_clicks_with(config: &CountingConfig, n_pulses: u64, seed: u64, block: u64) -> Result<ClickRecord> {
    config.validate()?;
    if n_pulses == 0 {
        return Err(Error::validation("at least one pulse is required"));
    }
    if block == 0 {
        return Err(Error::validation("block size must be positive"));
    }
    let model = PulseModel::new(config);
    let key = stream_key(seed);
    let blocks = n_pulses.div_ceil(block);
    let parts: Vec<(Vec<Click>, Vec<Click>)> = (0..blocks)
        .into_par_iter()
        .map(|b| simulate_block(&model, key, b * block..((b + 1) * block).min(n_pulses)))
        .collect();
    let (mut signal, mut idler) = (Vec::new(), Vec::new());
    for (s, i) in parts {
        signal.extend(s);
        idler.extend(i);
    }
    let period = config.period_ns();
    Ok(ClickRecord {
        pulses: n_pulses,
        signal: apply_dead_time(signal, config.dead_time_ns, period),
        idler: apply_dead_time(idler, config.dead_time_ns, period),
    })
}

pub fn simulate_clicks(config: &CountingConfig, n_pulses: u64, seed: u64) -> Result<ClickRecord> {
    simulate_clicks_with(config, n_pulses, seed, DEFAULT_BLOCK_PULSES)
}

/// Histogram of every idler − signal delay inside the correlation window.
/// Both click lists must be ordered by slot.
pub fn histogram_from_clicks(config: &CountingConfig, clicks: &ClickRecord) -> Result<CoincidenceHistogram> {
    config.validate()?;
    let ordered = |c: &[Click]| c.windows(2).all(|w| w[0].slot <= w[1].slot);
    if !ordered(&clicks.signal) || !ordered(&clicks.idler) {
        return Err(Error::validation("clicks must be ordered by slot"));
    }
    let mut hist = CoincidenceHistogram::empty(config, clicks.pulses);
    hist.singles_signal = clicks.signal.len() as u64;
    hist.singles_idler = clicks.idler.len() as u64;
    let period = config.period_ns();
    // one extra period absorbs jitter at the window edge
    let reach = config.window_periods as u64 + 1;
    let mut lo = 0;
    for s in &clicks.signal {
        let first = s.slot.saturating_sub(reach);
        while lo < clicks.idler.len() && clicks.idler[lo].slot < first {
            lo += 1;
        }
        for i in &clicks.idler[lo..] {
            if i.slot > s.slot + reach {
                break;
            }
            let delay = (i.slot as i64 - s.slot as i64) as f64 * period + (i.offset_ns - s.offset_ns);
            if let Some(k) = hist.bin_of(delay) {
                hist.counts[k] += 1;
            }
        }
    }
    Ok(hist)
}

/// Monte Carlo coincidence histogram; deterministic for a fixed seed.
pub fn simulate_pulses(config: &CountingConfig, n_pulses: u64, seed: u64) -> Result<CoincidenceHistogram> {
    histogram_from_clicks(config, &simulate_clicks(config, n_pulses, seed)?)
}
