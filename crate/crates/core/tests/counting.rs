use pcfpairs::counting::*;
use pcfpairs::Error;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn cfg(mu: f64, es: f64, ei: f64, ds: f64, di: f64) -> CountingConfig {
    CountingConfig { mean_pairs: mu, eta_signal: es, eta_idler: ei, dark_signal: ds, dark_idler: di, ..Default::default() }
}

fn mean(v: &[u64]) -> f64 {
    v.iter().sum::<u64>() as f64 / v.len() as f64
}

/// Asserts that every Monte Carlo count lies within 3σ of the closed form.
fn assert_matches_analytic(c: &CountingConfig, pulses: u64, seed: u64) {
    let h = simulate_pulses(c, pulses, seed).unwrap();
    let car = car_from_histogram(&h, 0.5 * c.bin_width_ns).unwrap();
    let stats = analytic_rates(c).unwrap().count_statistics(pulses, c.window_periods);
    let checks = [
        ("singles_signal", stats.singles_signal, h.singles_signal as f64),
        ("singles_idler", stats.singles_idler, h.singles_idler as f64),
        ("coincidences", stats.coincidences, car.central_counts as f64),
        ("accidentals", stats.accidentals, mean(&car.side_peak_counts)),
    ];
    for (name, expect, got) in checks {
        assert!(expect.z(got).abs() < 3.0, "{name}: {got} vs {} ± {} in {c:?}", expect.mean, expect.sigma);
    }
}

#[test]
fn silent_source_leaves_histogram_empty() {
    let h = simulate_pulses(&cfg(0.0, 0.5, 0.5, 0.0, 0.0), 100_000, 1).unwrap();
    assert_eq!(h.total(), 0);
    assert_eq!(h.singles_signal + h.singles_idler, 0);
}

#[test]
fn darks_alone_give_zero_car() {
    let c = cfg(0.0, 0.5, 0.5, 0.02, 0.03);
    let h = simulate_pulses(&c, 2_000_000, 9).unwrap();
    let r = car_from_histogram(&h, 1.25).unwrap();
    assert!(r.car.abs() < 3.0 * r.car_sigma, "{r:?}");
    let stats = analytic_rates(&c).unwrap().count_statistics(2_000_000, 5);
    assert!((stats.accidentals.mean / 2e6 - 0.02 * 0.03).abs() < 1e-9);
    assert!(stats.accidentals.z(mean(&r.side_peak_counts)).abs() < 3.0);
}

#[test]
fn coincidence_rate_matches_closed_form() {
    assert_matches_analytic(&cfg(0.1, 0.22, 0.22, 0.0, 0.0), 10_000_000, 2);
}

#[test]
fn thermal_statistics_match_closed_form() {
    let c = CountingConfig { statistics: PairStatistics::Thermal, ..cfg(0.15, 0.4, 0.3, 1e-3, 2e-3) };
    assert_matches_analytic(&c, 4_000_000, 5);
}

#[test]
fn shuffled_idler_slots_give_uncorrelated_rate() {
    let c = cfg(0.1, 0.3, 0.3, 1e-3, 1e-3);
    let n = 2_000_000u64;
    let mut clicks = simulate_clicks(&c, n, 4).unwrap();
    let mut perm: Vec<u64> = (0..n).collect();
    perm.shuffle(&mut Pcg64Mcg::seed_from_u64(99));
    for k in clicks.idler.iter_mut() {
        k.slot = perm[k.slot as usize];
    }
    clicks.idler.sort_by_key(|k| k.slot);
    let h = histogram_from_clicks(&c, &clicks).unwrap();
    let r = car_from_histogram(&h, 1.25).unwrap();
    let a = analytic_rates(&c).unwrap();
    let expect = n as f64 * a.p_signal * a.p_idler;
    assert!((r.central_counts as f64 - expect).abs() < 3.0 * expect.sqrt(), "{} vs {expect}", r.central_counts);
}

#[test]
fn synthetic_histogram_reproduces_analytic_car() {
    let c = cfg(0.02, 0.25, 0.2, 1e-4, 1e-3);
    let a = analytic_rates(&c).unwrap();
    let seconds = 30.0;
    let pulses = (seconds * c.repetition_rate_hz) as u64;
    let mut h = CoincidenceHistogram::empty(&c, pulses);
    let z = h.bin_of(0.0).unwrap();
    h.counts[z] = (a.coincidences * seconds).round() as u64;
    for k in 1..=5 {
        for sign in [-1.0, 1.0] {
            let b = h.bin_of(sign * 100.0 * k as f64).unwrap();
            h.counts[b] = (a.accidentals * seconds).round() as u64;
        }
    }
    let r = car_from_histogram(&h, 1.25).unwrap();
    assert!((r.car - a.car).abs() < r.car_sigma, "{} vs {}", r.car, a.car);
    assert_eq!(r.car, (r.n_c - r.n_a) / r.n_a);
}

#[test]
fn histogram_independent_of_blocking_and_threads() {
    let c = cfg(0.05, 0.3, 0.2, 1e-3, 1e-3);
    let reference = simulate_clicks_with(&c, 300_001, 7, 1 << 16).unwrap();
    for block in [1, 977, 300_001] {
        assert_eq!(simulate_clicks_with(&c, 300_001, 7, block).unwrap(), reference);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    assert_eq!(pool.install(|| simulate_pulses(&c, 300_001, 7)).unwrap(), histogram_from_clicks(&c, &reference).unwrap());
    assert_ne!(simulate_pulses(&c, 300_001, 8).unwrap(), simulate_pulses(&c, 300_001, 7).unwrap());
}

#[test]
fn side_peaks_are_uniform() {
    let c = cfg(0.1, 0.3, 0.3, 1e-3, 1e-3);
    let r = car_from_histogram(&simulate_pulses(&c, 3_000_000, 12).unwrap(), 1.25).unwrap();
    let m = mean(&r.side_peak_counts);
    let chi2: f64 = r.side_peak_counts.iter().map(|&x| (x as f64 - m).powi(2) / m).sum();
    let dof = (r.side_peak_counts.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2}, p {p}");
}

#[test]
fn histogram_shows_pulse_train() {
    let p = Preset::builtin("paper_replica").unwrap();
    let h = simulate_pulses(&p.counting, 10_000_000, 42).unwrap();
    let at = |t: f64| h.counts[h.bin_of(t).unwrap()];
    for t in [0.0, -100.0, 100.0, -200.0, 200.0] {
        assert!(at(t) > 0, "no peak at {t} ns");
    }
    // nothing between the peaks with sub-ns jitter
    assert_eq!(at(50.0) + at(-150.0), 0);
    assert!(at(0.0) > 10 * at(100.0));
}

#[test]
fn darkless_car_decreases_with_power() {
    let c = CountingConfig { pair_rate_per_mw2: Some(0.01), ..cfg(0.0, 0.3, 0.3, 0.0, 0.0) };
    let pts = sweep_power(&c, &[4.0, 1.0, 2.0, 3.0], 2_000_000, 3, 1.25).unwrap();
    assert!(pts.windows(2).all(|w| w[0].power_mw < w[1].power_mw));
    for w in pts.windows(2) {
        let (a, b) = (w[0].car.as_ref().unwrap(), w[1].car.as_ref().unwrap());
        assert!(b.car < a.car + 3.0 * (a.car_sigma.powi(2) + b.car_sigma.powi(2)).sqrt());
    }
}

#[test]
fn replica_car_curve_has_a_maximum() {
    let p = Preset::builtin("paper_replica").unwrap();
    let pts = sweep_power(&p.counting, &p.sweep.powers_mw(), 20_000_000, 1, 1.25).unwrap();
    let cars: Vec<f64> = pts.iter().map(|x| x.car.as_ref().unwrap().car).collect();
    let best = (0..cars.len()).max_by(|&a, &b| cars[a].total_cmp(&cars[b])).unwrap();
    assert!(best > 0 && best < cars.len() - 1, "{cars:?}");
    assert!(cars[0] < 0.8 * cars[best] && cars[cars.len() - 1] < 0.8 * cars[best]);
}

#[test]
fn analytic_rate_is_quadratic_at_low_power() {
    let p = Preset::builtin("paper_replica").unwrap();
    let rate = |mw: f64| analytic_rates(&p.counting.at_power(mw).unwrap()).unwrap().coincidences;
    let slope = (rate(3.0).ln() - rate(0.3).ln()) / 10f64.ln();
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
}

#[test]
fn sweep_records_failed_points() {
    let c = CountingConfig { pair_rate_per_mw2: Some(1.0), ..cfg(0.0, 0.3, 0.3, 0.0, 0.0) };
    // 20 mW gives μ = 400, beyond the validated range
    let pts = sweep_power(&c, &[20.0, 0.1], 1000, 3, 1.25).unwrap();
    assert!(pts[0].error.is_none());
    assert!(pts[1].error.is_some());
    let mut buf = Vec::new();
    write_sweep_csv(&pts, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("power_mw,cc_per_s,car,car_sigma\n"));
    assert!(text.ends_with("20,,,\n"));
}

#[test]
fn preset_documents_calibrated_darks() {
    let p = Preset::builtin("paper_replica").unwrap();
    let c = &p.counting;
    assert!((c.eta_signal * c.eta_idler - 0.05).abs() < 1e-12);
    assert_eq!(c.repetition_rate_hz, 1e7);
    assert_eq!(c.bin_width_ns, 2.5);
    let cal = calibrate_darks(c, 500.0, 70.0).unwrap();
    assert!((cal.dark_signal / c.dark_signal - 1.0).abs() < 1e-4);
    assert!((cal.dark_idler / c.dark_idler - 1.0).abs() < 1e-4);
    assert_eq!(p.sweep.powers_mw().len(), 12);
    assert!(matches!(Preset::builtin("nope"), Err(Error::Validation(_))));
}

#[test]
fn invalid_probabilities_rejected() {
    assert!(matches!(simulate_pulses(&cfg(0.1, 1.2, 0.3, 0.0, 0.0), 10, 1), Err(Error::Validation(_))));
    assert!(matches!(simulate_pulses(&cfg(-0.1, 0.2, 0.3, 0.0, 0.0), 10, 1), Err(Error::Validation(_))));
    assert!(matches!(analytic_rates(&cfg(0.1, 0.2, 0.3, 0.0, -1e-3)), Err(Error::Validation(_))));
}

#[test]
fn dead_time_suppresses_clicks() {
    let c = cfg(0.5, 0.8, 0.8, 0.0, 0.0);
    let free = simulate_pulses(&c, 100_000, 2).unwrap();
    let dead = simulate_pulses(&CountingConfig { dead_time_ns: 250.0, ..c }, 100_000, 2).unwrap();
    assert!(dead.singles_signal < free.singles_signal);
}

#[test]
fn histogram_csv() {
    let h = simulate_pulses(&cfg(0.1, 0.3, 0.3, 0.0, 0.0), 1000, 2).unwrap();
    let mut buf = Vec::new();
    h.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("bin_center_ns,counts\n-500,"));
    assert_eq!(text.lines().count(), 402);
}
