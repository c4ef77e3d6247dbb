//! Resolved parameters of each subcommand and their execution.
//!
//! A job is fully described by its command name and parameter JSON; that
//! pair is what the manifest stores and what `replay` executes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use pcfpairs::counting::{analytic_rates, car_from_histogram, simulate_pulses, sweep_power, write_sweep_csv, CountingConfig, SweepPlan};
use pcfpairs::dispersion::{fit_gvd_polynomial, DispersionModel, GvdSamples, StepIndexProxy, DEFAULT_REFERENCE_NM};
use pcfpairs::fbg::{as_idler_filter, design_uniform, reflection_fwhm_nm, spectrum_analytic, transmission_contrast_db, GratingSpec, SpectralFilter};
use pcfpairs::jsa::{compute_jsi, heralded_marginal, reassemble_set_scan, simulate_set_scan, write_spectrum_csv, JointSpectrum, PumpEnvelope};
use pcfpairs::phasematch::{contour, solve_signal_with, write_contour_csv, ContourRow, FwmParams, SolverOptions};
use pcfpairs::spectral::{fwhm, SpectralGrid};
use pcfpairs::Error;

use crate::run::{CliError, CliResult, Inputs, Outputs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSource {
    /// Polynomial fit of measured D(λ) samples.
    Gvd { path: PathBuf, degree: usize },
    /// Polynomial surrogate of the step-index proxy; the nominal geometry
    /// when no file is given.
    Proxy { path: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    pub id: String,
    pub source: ModelSource,
    /// Wavelengths of the exported D(λ) curve; the model window at 501
    /// points when absent.
    pub curve: Option<SpectralGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasematchParams {
    pub model: PathBuf,
    pub pump_start_nm: f64,
    pub pump_stop_nm: f64,
    pub points: usize,
    /// Signal search window; from the model window edge to 10 nm below the
    /// shortest pump when absent.
    pub signal_window_nm: Option<(f64, f64)>,
    pub fwm: FwmParams,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsiParams {
    pub model: PathBuf,
    pub pump: PumpEnvelope,
    pub fiber_length_m: f64,
    pub fwm: FwmParams,
    pub signal_grid: SpectralGrid,
    pub idler_grid: SpectralGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetScanParams {
    pub jsi: JsiParams,
    /// Idler seed wavelengths; every idler grid point when absent, in which
    /// case the reassembled JSI is written too.
    pub seeds: Option<SeedRange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FbgParams {
    Design {
        bragg_nm: f64,
        fwhm_nm: f64,
        contrast_db: f64,
        n_eff: f64,
        spectrum: Option<SpectralGrid>,
    },
    Spec {
        path: PathBuf,
        spectrum: Option<SpectralGrid>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeraldParams {
    pub jsi: PathBuf,
    pub jsi_metadata: PathBuf,
    pub filter: PathBuf,
    /// Out-of-band reflection floor, dB below the peak.
    pub floor_db: Option<f64>,
    /// Sampling step of a grating filter, nm.
    pub filter_step_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsimParams {
    pub counting: CountingConfig,
    /// Sets μ = k·P² when present; otherwise `counting.mean_pairs` is used.
    pub power_mw: Option<f64>,
    pub pulses: u64,
    pub seed: u64,
    pub peak_halfwidth_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub counting: CountingConfig,
    pub sweep: SweepPlan,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Dispersion(DispersionParams),
    Phasematch(PhasematchParams),
    Jsi(JsiParams),
    SetScan(SetScanParams),
    Fbg(FbgParams),
    Herald(HeraldParams),
    Countsim(CountsimParams),
    Sweep(SweepParams),
}

fn from_value<T: for<'de> Deserialize<'de>>(command: &str, params: Value) -> CliResult<T> {
    serde_json::from_value(params).map_err(|e| CliError::Usage(format!("invalid {command} parameters: {e}")))
}

fn to_value<T: Serialize>(params: &T) -> Value {
    serde_json::to_value(params).expect("parameters serialise")
}

impl Job {
    pub fn command(&self) -> &'static str {
        match self {
            Job::Dispersion(_) => "dispersion",
            Job::Phasematch(_) => "phasematch",
            Job::Jsi(_) => "jsi",
            Job::SetScan(_) => "set-scan",
            Job::Fbg(_) => "fbg",
            Job::Herald(_) => "herald",
            Job::Countsim(_) => "countsim",
            Job::Sweep(_) => "sweep",
        }
    }

    pub fn params(&self) -> Value {
        match self {
            Job::Dispersion(p) => to_value(p),
            Job::Phasematch(p) => to_value(p),
            Job::Jsi(p) => to_value(p),
            Job::SetScan(p) => to_value(p),
            Job::Fbg(p) => to_value(p),
            Job::Herald(p) => to_value(p),
            Job::Countsim(p) => to_value(p),
            Job::Sweep(p) => to_value(p),
        }
    }

    pub fn from_parts(command: &str, params: Value) -> CliResult<Self> {
        Ok(match command {
            "dispersion" => Job::Dispersion(from_value(command, params)?),
            "phasematch" => Job::Phasematch(from_value(command, params)?),
            "jsi" => Job::Jsi(from_value(command, params)?),
            "set-scan" => Job::SetScan(from_value(command, params)?),
            "fbg" => Job::Fbg(from_value(command, params)?),
            "herald" => Job::Herald(from_value(command, params)?),
            "countsim" => Job::Countsim(from_value(command, params)?),
            "sweep" => Job::Sweep(from_value(command, params)?),
            other => return Err(CliError::Usage(format!("unknown command '{other}'"))),
        })
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Countsim(p) => Some(p.seed),
            Job::Sweep(p) => Some(p.seed),
            _ => None,
        }
    }

    /// Runs the job; returns summary lines for the terminal.
    pub fn execute(&self, inputs: &mut Inputs, out: &mut Outputs) -> CliResult<Vec<String>> {
        match self {
            Job::Dispersion(p) => run_dispersion(p, inputs, out),
            Job::Phasematch(p) => run_phasematch(p, inputs, out),
            Job::Jsi(p) => run_jsi(p, inputs, out),
            Job::SetScan(p) => run_set_scan(p, inputs, out),
            Job::Fbg(p) => run_fbg(p, inputs, out),
            Job::Herald(p) => run_herald(p, inputs, out),
            Job::Countsim(p) => run_countsim(p, out),
            Job::Sweep(p) => run_sweep(p, out),
        }
    }
}

fn load_model(path: &Path, inputs: &mut Inputs) -> CliResult<DispersionModel> {
    let text = inputs.read_string(path)?;
    DispersionModel::from_json(&text).map_err(|e| CliError::input(path, e))
}

fn run_dispersion(p: &DispersionParams, inputs: &mut Inputs, out: &mut Outputs) -> CliResult<Vec<String>> {
    let model = match &p.source {
        ModelSource::Gvd { path, degree } => {
            let bytes = inputs.read(path)?;
            let samples = GvdSamples::from_csv_reader(&bytes[..]).map_err(|e| CliError::input(path, e))?;
            DispersionModel::from_fit(p.id.clone(), fit_gvd_polynomial(&samples, *degree)?, DEFAULT_REFERENCE_NM)?
        }
        ModelSource::Proxy { path } => {
            let proxy = match path {
                Some(path) => serde_json::from_slice::<StepIndexProxy>(&inputs.read(path)?).map_err(|e| CliError::input(path, e))?,
                None => StepIndexProxy::nominal(),
            };
            DispersionModel::design_surrogate(p.id.clone(), proxy)?
        }
    };
    let (lo, hi) = model.window_nm();
    let curve = match p.curve {
        Some(g) => g,
        None => SpectralGrid::new(lo, hi, 501)?,
    };
    curve.validate()?;
    let mut text = model.to_json()?;
    text.push('\n');
    out.put("model.json", text.as_bytes())?;
    let d = curve.wavelengths().iter().map(|&l| model.d_param(l)).collect::<pcfpairs::Result<Vec<f64>>>()?;
    out.put_with("dispersion.csv", |w| {
        w.extend_from_slice(b"wavelength_nm,D_ps_nm_km\n");
        for (l, v) in curve.wavelengths().iter().zip(&d) {
            w.extend_from_slice(format!("{l},{v}\n").as_bytes());
        }
        Ok(())
    })?;
    let mut lines = vec![format!("model '{}' valid over {lo}-{hi} nm", model.id())];
    if let Some(fit) = model.fit_report() {
        lines.push(format!("fit degree {}, rms residual {:.3} ps/(nm km)", fit.degree, fit.rms_residual));
    }
    if model.contains_nm(DEFAULT_REFERENCE_NM) {
        lines.push(format!("D({DEFAULT_REFERENCE_NM} nm) = {:.3} ps/(nm km)", model.d_param(DEFAULT_REFERENCE_NM)?));
    }
    Ok(lines)
}

fn run_phasematch(p: &PhasematchParams, inputs: &mut Inputs, out: &mut Outputs) -> CliResult<Vec<String>> {
    let model = load_model(&p.model, inputs)?;
    let (a, b) = (p.pump_start_nm, p.pump_stop_nm);
    let single = p.points == 1 && a == b;
    if !(a > 0.0 && (single || (p.points >= 2 && b > a))) {
        return Err(Error::Validation(format!("empty pump range {a}-{b} nm with {} points", p.points)).into());
    }
    let (lo, hi) = model.window_nm();
    for pump in [a, b] {
        if !model.contains_nm(pump) {
            return Err(Error::Domain { quantity: "pump wavelength (nm)", value: pump, min: lo, max: hi }.into());
        }
    }
    let window = p.signal_window_nm.unwrap_or((lo, a - 10.0));
    let rows = if single {
        let points = solve_signal_with(&model, &p.fwm, a, window, &p.solver)?;
        vec![ContourRow { lambda_pump_nm: a, points, error: None }]
    } else {
        contour(&model, &p.fwm, (a, b), p.points, window, &p.solver)?
    };
    out.put_with("contour.csv", |w| write_contour_csv(&rows, w))?;
    let mut lines = Vec::new();
    let solved = rows.iter().filter(|r| !r.points.is_empty()).count();
    if single {
        match rows[0].points.first() {
            Some(pt) => lines.push(format!("pump {a} nm: signal {:.2} nm, idler {:.2} nm", pt.lambda_signal_nm, pt.lambda_idler_nm)),
            None => lines.push(format!("pump {a} nm: no phase-matched signal in {:?} nm", window)),
        }
    } else {
        lines.push(format!("{solved} of {} pump wavelengths phase matched", rows.len()));
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        lines.push(format!("pump {} nm failed: {}", r.lambda_pump_nm, r.error.as_deref().unwrap_or_default()));
    }
    Ok(lines)
}

fn jsi_from(p: &JsiParams, model: &DispersionModel) -> CliResult<JointSpectrum> {
    Ok(compute_jsi(&p.pump, model, &p.fwm, p.fiber_length_m, &p.signal_grid, &p.idler_grid)?)
}

fn put_jsi(out: &mut Outputs, stem: &str, jsi: &JointSpectrum) -> CliResult<()> {
    out.put_with(&format!("{stem}.csv"), |w| jsi.write_csv(w))?;
    let mut meta = jsi.metadata_json()?;
    meta.push('\n');
    out.put(&format!("{stem}.json"), meta.as_bytes())
}

fn run_jsi(p: &JsiParams, inputs: &mut Inputs, out: &mut Outputs) -> CliResult<Vec<String>> {
    let model = load_model(&p.model, inputs)?;
    let jsi = jsi_from(p, &model)?;
    put_jsi(out, "jsi", &jsi)?;
    let (idler, signal) = jsi.marginals();
    let (li, ls) = (jsi.idler_grid.wavelengths(), jsi.signal_grid.wavelengths());
    out.put_with("marginal_idler.csv", |w| write_spectrum_csv(&li, &idler, w))?;
    out.put_with("marginal_signal.csv", |w| write_spectrum_csv(&ls, &signal, w))?;
    let mut lines = Vec::new();
    if jsi.metadata.overlap_warning {
        lines.push("warning: the grid barely overlaps the phase-matched region".to_string());
    }
    if let (Ok(wi), Ok(ws)) = (fwhm(&li, &idler), fwhm(&ls, &signal)) {
        lines.push(format!("marginal FWHM: idler {wi:.4} nm, signal {ws:.4} nm"));
    }
    Ok(lines)
}

fn run_set_scan(p: &SetScanParams, inputs: &mut Inputs, out: &mut Outputs) -> CliResult<Vec<String>> {
    let j = &p.jsi;
    let model = load_model(&j.model, inputs)?;
    let seeds: Vec<f64> = match p.seeds {
        None => j.idler_grid.wavelengths(),
        Some(s) => {
            if s.count == 0 || (s.count > 1 && !(s.stop_nm > s.start_nm)) {
                return Err(Error::Validation("seed range is empty".into()).into());
            }
            let step = if s.count > 1 { (s.stop_nm - s.start_nm) / (s.count - 1) as f64 } else { 0.0 };
            (0..s.count).map(|k| if k + 1 == s.count && s.count > 1 { s.stop_nm } else { s.start_nm + k as f64 * step }).collect()
        }
    };
    let rows = simulate_set_scan(&j.pump, &model, &j.fwm, j.fiber_length_m, &j.signal_grid, &j.idler_grid, &seeds)?;
    let failed: Vec<_> = rows.iter().filter_map(|r| r.spectrum.as_ref().err().map(|e| (r.seed_nm, e.clone()))).collect();
    out.put_with("set_rows.csv", |w| {
        w.extend_from_slice(b"seed_nm\\signal_nm");
        for l in j.signal_grid.wavelengths() {
            w.extend_from_slice(format!(",{l}").as_bytes());
        }
        w.push(b'\n');
        for r in &rows {
            if let Ok(spec) = &r.spectrum {
                w.extend_from_slice(r.seed_nm.to_string().as_bytes());
                for v in spec {
                    w.extend_from_slice(format!(",{v}").as_bytes());
                }
                w.push(b'\n');
            }
        }
        Ok(())
    })?;
    #[derive(Serialize)]
    struct Failure {
        seed_nm: f64,
        error: String,
    }
    let failures: Vec<Failure> = failed.iter().map(|(s, e)| Failure { seed_nm: *s, error: e.clone() }).collect();
    out.put_json("set_failures.json", &failures)?;
    let mut lines = vec![format!("{} of {} seeds measured", rows.len() - failed.len(), rows.len())];
    if p.seeds.is_none() {
        let jsi = reassemble_set_scan(&rows, &j.pump, &model, &j.fwm, j.fiber_length_m, &j.signal_grid, &j.idler_grid)?;
        put_jsi(out, "set_jsi", &jsi)?;
        lines.push("reassembled JSI written to set_jsi.csv".into());
    }
    Ok(lines)
}

fn default_spectrum(bragg_nm: f64) -> pcfpairs::Result<SpectralGrid> {
    SpectralGrid::new(bragg_nm - 2.0, bragg_nm + 2.0, 4001)
}

/// Summary of a grating given by its physical parameters.
#[derive(Serialize, Deserialize)]
struct GratingReport {
    spec: GratingSpec,
    fwhm_nm: f64,
    transmission_contrast_db: f64,
}

fn run_fbg(p: &FbgParams, inputs: &mut Inputs, out: &mut Outputs) -> CliResult<Vec<String>> {
    let (spec, grid) = match p {
        FbgParams::Design { bragg_nm, fwhm_nm, contrast_db, n_eff, spectrum } => {
            let design = design_uniform(*bragg_nm, *fwhm_nm, *contrast_db, *n_eff)?;
            out.put_json("fbg.json", &design)?;
            (design.spec, spectrum.map_or_else(|| default_spectrum(*bragg_nm), Ok)?)
        }
        FbgParams::Spec { path, spectrum } => {
            let spec: GratingSpec = serde_json::from_slice(&inputs.read(path)?).map_err(|e| CliError::input(path, e))?;
            spec.validate().map_err(|e| CliError::input(path, e))?;
            let report = GratingReport { spec, fwhm_nm: reflection_fwhm_nm(&spec)?, transmission_contrast_db: transmission_contrast_db(spec.kappa_length()) };
            out.put_json("fbg.json", &report)?;
            (spec, spectrum.map_or_else(|| default_spectrum(spec.bragg_nm()), Ok)?)
        }
    };
    let filter = spectrum_analytic(&spec, &grid)?;
    out.put_with("fbg_spectrum.csv", |w| filter.write_csv(w))?;
    let t_min = filter.transmittance.iter().cloned().fold(1.0, f64::min);
    Ok(vec![
        format!("grating: {:.3} mm, period {:.4} nm, delta n {:.3e}", spec.length_mm, spec.period_nm, spec.delta_n),
        format!("resimulated: reflection FWHM {:.4} nm, contrast {:.3} dB", filter.fwhm_nm()?, -10.0 * t_min.log10()),
    ])
}

/// Reads a filter file: a grating design or report (anything with a `spec`
/// field), a bare grating spec, or a sampled filter.
fn load_filter(path: &Path, inputs: &mut Inputs, idler: &SpectralGrid, p: &HeraldParams) -> CliResult<SpectralFilter> {
    #[derive(Deserialize)]
    struct WithSpec {
        spec: GratingSpec,
    }
    let bytes = inputs.read(path)?;
    let spec = serde_json::from_slice::<WithSpec>(&bytes).map(|w| w.spec).or_else(|_| serde_json::from_slice::<GratingSpec>(&bytes));
    match spec {
        Ok(spec) => {
            spec.validate().map_err(|e| CliError::input(path, e))?;
            let lb = spec.bragg_nm();
            let (lo, hi) = (idler.start_nm.min(lb - 5.0), idler.stop_nm.max(lb + 5.0));
            if !(p.filter_step_nm > 0.0) {
                return Err(Error::Validation("filter step must be positive".into()).into());
            }
            let points = ((hi - lo) / p.filter_step_nm).round() as usize + 1;
            Ok(as_idler_filter(&spec, &SpectralGrid::new(lo, hi, points)?, p.floor_db)?)
        }
        Err(_) => {
            let filter: SpectralFilter = serde_json::from_slice(&bytes).map_err(|e| CliError::input(path, e))?;
            filter.validate().map_err(|e| CliError::input(path, e))?;
            if p.floor_db.is_some() {
                return Err(CliError::Usage("--floor-db applies to grating filters only".into()));
            }
            Ok(filter)
        }
    }
}

fn run_herald(p: &HeraldParams, inputs: &mut Inputs, out: &mut Outputs) -> CliResult<Vec<String>> {
    // hash both files, then let the library parse them
    inputs.read(&p.jsi)?;
    inputs.read(&p.jsi_metadata)?;
    let jsi = JointSpectrum::read(&p.jsi, &p.jsi_metadata).map_err(|e| CliError::input(&p.jsi, e))?;
    let filter = load_filter(&p.filter, inputs, &jsi.idler_grid, p)?;
    let h = heralded_marginal(&jsi, &filter)?;
    #[derive(Serialize)]
    struct Summary {
        idler_fwhm_nm: f64,
        signal_fwhm_nm: f64,
        filter_fwhm_nm: Option<f64>,
    }
    let summary = Summary { idler_fwhm_nm: h.idler_fwhm_nm, signal_fwhm_nm: h.signal_fwhm_nm, filter_fwhm_nm: filter.fwhm_nm().ok() };
    out.put_json("herald.json", &summary)?;
    out.put_with("heralded_idler.csv", |w| h.write_idler_csv(w))?;
    out.put_with("heralded_signal.csv", |w| h.write_signal_csv(w))?;
    Ok(vec![format!("heralded FWHM: idler {:.4} nm, signal {:.4} nm", h.idler_fwhm_nm, h.signal_fwhm_nm)])
}

fn run_countsim(p: &CountsimParams, out: &mut Outputs) -> CliResult<Vec<String>> {
    let config = match p.power_mw {
        Some(mw) => p.counting.at_power(mw)?,
        None => p.counting.clone(),
    };
    let hist = simulate_pulses(&config, p.pulses, p.seed)?;
    out.put_with("histogram.csv", |w| hist.write_csv(w))?;
    let analytic = analytic_rates(&config)?;
    let car = car_from_histogram(&hist, p.peak_halfwidth_ns)?;
    #[derive(Serialize)]
    struct Report<'a> {
        mean_pairs: f64,
        pulses: u64,
        singles_signal: u64,
        singles_idler: u64,
        car: &'a pcfpairs::counting::CarResult,
        analytic: pcfpairs::counting::AnalyticRates,
    }
    let report = Report { mean_pairs: config.mean_pairs, pulses: p.pulses, singles_signal: hist.singles_signal, singles_idler: hist.singles_idler, car: &car, analytic };
    out.put_json("car.json", &report)?;
    let bound = if car.lower_bound { " (lower bound)" } else { "" };
    Ok(vec![
        format!("mu = {:.4e}, {} pulses", config.mean_pairs, p.pulses),
        format!("coincidences {:.1}/s, CAR {:.2} +/- {:.2}{bound}", car.n_c, car.car, car.car_sigma),
        format!("closed form: coincidences {:.1}/s, CAR {:.2}", analytic.coincidences, analytic.car),
    ])
}

fn run_sweep(p: &SweepParams, out: &mut Outputs) -> CliResult<Vec<String>> {
    p.sweep.validate()?;
    let powers = p.sweep.powers_mw();
    let points = sweep_power(&p.counting, &powers, p.sweep.pulses_per_point, p.seed, p.sweep.peak_halfwidth_ns)?;
    out.put_with("sweep.csv", |w| write_sweep_csv(&points, w))?;
    #[derive(Serialize)]
    struct Expected {
        power_mw: f64,
        cc_per_s: f64,
        car: f64,
    }
    let mut sorted = powers.clone();
    sorted.sort_by(f64::total_cmp);
    let expected = sorted
        .iter()
        .map(|&mw| {
            let r = analytic_rates(&p.counting.at_power(mw)?)?;
            Ok(Expected { power_mw: mw, cc_per_s: r.coincidences, car: r.car })
        })
        .collect::<pcfpairs::Result<Vec<_>>>()?;
    #[derive(Serialize)]
    struct Report<'a> {
        points: &'a [pcfpairs::counting::SweepPoint],
        analytic: Vec<Expected>,
    }
    out.put_json("sweep.json", &Report { points: &points, analytic: expected })?;
    let mut lines = vec!["power_mw  cc_per_s  CAR".to_string()];
    for pt in &points {
        lines.push(match (&pt.car, &pt.error) {
            (Some(c), _) => format!("{:8.3}  {:8.1}  {:.2} +/- {:.2}", pt.power_mw, c.n_c, c.car, c.car_sigma),
            (None, e) => format!("{:8.3}  failed: {}", pt.power_mw, e.as_deref().unwrap_or_default()),
        });
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_round_trip_through_json() {
        let job = Job::Countsim(CountsimParams {
            counting: CountingConfig::default(),
            power_mw: Some(1.0),
            pulses: 10,
            seed: 3,
            peak_halfwidth_ns: 1.25,
        });
        assert_eq!(Job::from_parts(job.command(), job.params()).unwrap(), job);
        let mut v = job.params();
        v["typo"] = 1.into();
        assert!(matches!(Job::from_parts("countsim", v), Err(CliError::Usage(_))));
        assert!(Job::from_parts("nope", Value::Null).is_err());
    }
}
