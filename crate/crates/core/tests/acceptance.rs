//! Acceptance checks. Prints one PASS/FAIL line per criterion with its
//! runtime and exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pcfpairs::counting::*;
use pcfpairs::dispersion::{fit_gvd, DispersionModel, GvdSamples, StepIndexProxy};
use pcfpairs::fbg::{as_idler_filter, design_uniform, reflectance_tmm, spectrum_analytic};
use pcfpairs::jsa::{compute_jsi, heralded_marginal, reassemble_set_scan, simulate_set_scan, PumpEnvelope};
use pcfpairs::phasematch::{mismatch, solve_signal, FwmParams};
use pcfpairs::spectral::{fwhm, SpectralGrid};
use pcfpairs::units::omega_from_nm;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;

type Check = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn grid(a: f64, b: f64, n: usize) -> SpectralGrid {
    SpectralGrid::new(a, b, n).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ac1() -> Check {
    let samples = GvdSamples::from_csv_path(fixture("gepcf_fig2a.csv")).map_err(err)?;
    let model = fit_gvd(&samples, 3).map_err(err)?;
    let pts = solve_signal(&model, &FwmParams::default(), 1064.0, (750.0, 1059.0)).map_err(err)?;
    let p = pts.first().ok_or("no phase-matched signal")?;
    let (s, i) = (p.lambda_signal_nm, p.lambda_idler_nm);
    ensure((s - 830.0).abs() <= 15.0 && (i - 1471.0).abs() <= 15.0, format!("signal {s:.2} nm, idler {i:.2} nm (830/1471 ± 15)"))
}

fn raw_taylor(betas: &[f64], w0: f64, w: f64) -> f64 {
    let x = w - w0;
    let mut fact = 1.0;
    let mut acc = 0.0;
    for (k, b) in betas.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        acc += b * x.powi(k as i32) / fact;
    }
    acc
}

fn ac2() -> Check {
    let mut rng = Pcg64Mcg::seed_from_u64(42);
    let w0 = omega_from_nm(1064.0);
    let p = FwmParams::default();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 1000 {
        let lp = rng.random_range(950.0..1200.0);
        let ls = rng.random_range(720.0..940.0);
        let (wp, ws) = (omega_from_nm(lp), omega_from_nm(ls));
        let wi = 2.0 * wp - ws;
        if wi <= omega_from_nm(2500.0) {
            continue;
        }
        let tail = [rng.random_range(-3e-26..3e-26), rng.random_range(-1e-40..1e-40), rng.random_range(-1e-55..1e-55)];
        let (c0, c1) = (rng.random_range(-1e7..1e7), rng.random_range(-1e-8..1e-8));
        let plain = [&[0.0, 0.0][..], &tail].concat();
        let shifted = [&[c0, c1][..], &tail].concat();
        let model = |betas: Vec<f64>| DispersionModel::taylor("case", 1064.0, betas, (600.0, 2500.0), 1064.0).map_err(err);
        let a = mismatch(&model(plain.clone())?, &p, wp, ws).map_err(err)?;
        let b = mismatch(&model(shifted.clone())?, &p, wp, ws).map_err(err)?;
        // raw sums, where the affine part cancels only algebraically
        let raw = |betas: &[f64]| raw_taylor(betas, w0, ws) + raw_taylor(betas, w0, wi) - 2.0 * raw_taylor(betas, w0, wp);
        let scale = [ws, wi, wp].iter().map(|&w| raw_taylor(&shifted, w0, w).abs()).sum::<f64>();
        let gauge_rel = (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
        let raw_rel = (raw(&plain) - raw(&shifted)).abs() / scale;
        worst = worst.max(gauge_rel).max(raw_rel);
        cases += 1;
    }
    ensure(worst <= 1e-12, format!("{cases} cases, worst relative change {worst:.2e} (limit 1e-12)"))
}

fn ac3() -> Check {
    let d = design_uniform(1556.0, 0.2, 17.5, 1.45).map_err(err)?;
    let lb = d.spec.bragg_nm();
    let s = spectrum_analytic(&d.spec, &grid(lb - 1.0, lb + 1.0, 20001)).map_err(err)?;
    let w = fwhm(&s.wavelength_nm, &s.reflectance).map_err(err)?;
    let contrast = -10.0 * s.transmittance.iter().cloned().fold(1.0, f64::min).log10();
    let g = grid(lb - 2.0, lb + 2.0, 2001);
    let tmm = reflectance_tmm(&d.spec, &g, 200).map_err(err)?;
    let exact = spectrum_analytic(&d.spec, &g).map_err(err)?;
    let dr = tmm.reflectance.iter().zip(&exact.reflectance).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(
        (w / 0.2 - 1.0).abs() < 0.01 && (contrast / 17.5 - 1.0).abs() < 0.01 && dr < 1e-10,
        format!("FWHM {w:.5} nm, contrast {contrast:.4} dB, TMM vs closed form {dr:.1e}"),
    )
}

fn design_jsi_inputs() -> Result<(DispersionModel, PumpEnvelope, SpectralGrid, SpectralGrid), String> {
    let model = DispersionModel::design_surrogate("design", StepIndexProxy::nominal()).map_err(err)?;
    Ok((model, PumpEnvelope::gaussian(1064.0, 1.0), grid(780.0, 840.0, 512), grid(1450.0, 1580.0, 2048)))
}

fn ac4() -> Check {
    let (model, pump, signal, idler) = design_jsi_inputs()?;
    let jsi = compute_jsi(&pump, &model, &FwmParams::default(), 1.0, &signal, &idler).map_err(err)?;
    let d = design_uniform(1556.0, 0.2, 17.5, 1.45).map_err(err)?;
    let filter = as_idler_filter(&d.spec, &grid(1450.0, 1580.0, 130_001), None).map_err(err)?;
    let h = heralded_marginal(&jsi, &filter).map_err(err)?;
    let w = h.idler_fwhm_nm;
    ensure((w - 0.20).abs() <= 0.05, format!("heralded idler FWHM {w:.4} nm on a 2048-point idler axis (0.20 ± 0.05)"))
}

/// Least-squares slope of ln y against ln x.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn ac5() -> Check {
    let preset = Preset::builtin("paper_replica").map_err(err)?;
    let plan = &preset.sweep;
    if plan.pulses_per_point != 100_000_000 {
        return Err(format!("preset runs {} pulses per point", plan.pulses_per_point));
    }
    let points = sweep_power(&preset.counting, &plan.powers_mw(), plan.pulses_per_point, 42, plan.peak_halfwidth_ns).map_err(err)?;
    let mut rows = Vec::new();
    for p in &points {
        let c = p.car.as_ref().ok_or_else(|| format!("{} mW failed: {:?}", p.power_mw, p.error))?;
        rows.push((p.power_mw, c.n_c, c.car, c.car_sigma));
    }

    // (a) lowest decade of power
    let low: Vec<_> = rows.iter().filter(|r| r.0 <= 10.0 * rows[0].0 * (1.0 + 1e-12)).collect();
    let slope = loglog_slope(&low.iter().map(|r| r.0).collect::<Vec<_>>(), &low.iter().map(|r| r.1).collect::<Vec<_>>());
    let a = (slope - 2.0).abs() <= 0.1;

    // (b) the maximum CAR, and the CAR at the point nearest 500 cc/s, which
    // must agree with the maximum within 2σ
    let best = rows.iter().max_by(|x, y| x.2.total_cmp(&y.2)).unwrap();
    let near = rows.iter().min_by(|x, y| (x.1.ln() - 500f64.ln()).abs().total_cmp(&(y.1.ln() - 500f64.ln()).abs())).unwrap();
    let consistent = best.2 - near.2 <= 2.0 * (best.3.powi(2) + near.3.powi(2)).sqrt();
    let b = (50.0..=90.0).contains(&best.2) && (50.0..=90.0).contains(&near.2) && consistent && (near.1 / 500.0).ln().abs() < 2f64.ln();

    // (c) log-interpolated CAR at 4000 cc/s
    let car_4000 = rows.windows(2).find(|w| w[0].1 <= 4000.0 && w[1].1 >= 4000.0).map(|w| {
        let f = (4000f64.ln() - w[0].1.ln()) / (w[1].1.ln() - w[0].1.ln());
        w[0].2 + f * (w[1].2 - w[0].2)
    });
    let c = car_4000.is_some_and(|v| v >= 10.0);

    let detail = format!(
        "(a) slope {slope:.3} over {:.2}-{:.2} mW; (b) max CAR {:.1} at {:.0} cc/s, CAR {:.1} ± {:.1} at {:.0} cc/s; (c) CAR {} at 4000 cc/s",
        low[0].0,
        low[low.len() - 1].0,
        best.2,
        best.1,
        near.2,
        near.3,
        near.1,
        car_4000.map_or("unreached".to_string(), |v| format!("{v:.1}"))
    );
    ensure(a && b && c, detail)
}

fn ac6() -> Check {
    let mut rng = Pcg64Mcg::seed_from_u64(42);
    let pulses = 5_000_000u64;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for case in 0..20 {
        let config = CountingConfig {
            mean_pairs: rng.random_range(0.005..0.2),
            eta_signal: rng.random_range(0.05..0.6),
            eta_idler: rng.random_range(0.05..0.6),
            dark_signal: rng.random_range(0.0..5e-3),
            dark_idler: rng.random_range(0.0..5e-3),
            statistics: if rng.random_bool(0.5) { PairStatistics::Poisson } else { PairStatistics::Thermal },
            ..Default::default()
        };
        let seed = rng.random::<u64>();
        let h = simulate_pulses(&config, pulses, seed).map_err(err)?;
        let car = car_from_histogram(&h, 0.5 * config.bin_width_ns).map_err(err)?;
        let stats = analytic_rates(&config).map_err(err)?.count_statistics(pulses, config.window_periods);
        let side_mean = car.side_peak_counts.iter().sum::<u64>() as f64 / car.side_peak_counts.len() as f64;
        for (name, expect, got) in [
            ("singles_signal", stats.singles_signal, h.singles_signal as f64),
            ("singles_idler", stats.singles_idler, h.singles_idler as f64),
            ("coincidences", stats.coincidences, car.central_counts as f64),
            ("accidentals", stats.accidentals, side_mean),
        ] {
            let z = expect.z(got).abs();
            worst = worst.max(z);
            if z > 3.0 {
                failures.push(format!("case {case} {name}: z = {z:.2}"));
            }
        }
    }
    let mut detail = format!("20 configs x 4 rates, worst |z| {worst:.2}");
    if !failures.is_empty() {
        detail = format!("{detail}; {}", failures.join("; "));
    }
    ensure(failures.is_empty(), detail)
}

fn ac7() -> Check {
    let (model, pump, signal, idler) = design_jsi_inputs()?;
    let p = FwmParams::default();
    let direct = compute_jsi(&pump, &model, &p, 1.0, &signal, &idler).map_err(err)?;
    let rows = simulate_set_scan(&pump, &model, &p, 1.0, &signal, &idler, &idler.wavelengths()).map_err(err)?;
    let rebuilt = reassemble_set_scan(&rows, &pump, &model, &p, 1.0, &signal, &idler).map_err(err)?;
    let same_bits = direct.intensity.len() == rebuilt.intensity.len()
        && direct.intensity.iter().zip(&rebuilt.intensity).all(|(a, b)| a.to_bits() == b.to_bits());
    ensure(same_bits && direct == rebuilt, format!("{} x {} grid, {} SET rows", idler.points, signal.points, rows.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Check, Duration); 7] = [
        ("AC1", "phase matching from measured GVD", ac1, Duration::from_secs(1)),
        ("AC2", "gauge invariance", ac2, Duration::from_secs(5)),
        ("AC3", "grating design round trip", ac3, Duration::from_secs(2)),
        ("AC4", "heralded bandwidth", ac4, Duration::from_secs(30)),
        ("AC5", "CAR sweep", ac5, Duration::from_secs(300)),
        ("AC6", "Monte Carlo vs closed form", ac6, Duration::from_secs(120)),
        ("AC7", "SET reassembly", ac7, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        let t = Instant::now();
        let result = check();
        let elapsed = t.elapsed();
        let in_time = elapsed <= limit;
        let (pass, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{id} {} {name}: {detail} [{:.2} s, limit {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", too slow" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
