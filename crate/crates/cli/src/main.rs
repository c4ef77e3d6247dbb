use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pcfpairs::counting::{CountingConfig, Preset, PRESET_NAMES};
use pcfpairs::jsa::{PumpEnvelope, PumpShape};
use pcfpairs::phasematch::{FwmParams, SolverOptions};
use pcfpairs::spectral::SpectralGrid;

mod jobs;
mod run;

use jobs::*;
use run::{apply_overrides, CliError, CliResult, Inputs, Manifest, Outputs, TOOL, VERSION};

#[derive(Parser)]
#[command(name = "pcfpairs", version, about = "Photon-pair source pipeline: dispersion, phase matching, joint spectra, gratings and coincidence counting")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Random seed for Monte Carlo commands (default: the preset's, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a resolved parameter, e.g. --set counting.eta_idler=0.15.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Counting preset: a built-in name or a JSON file.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Print resolved parameters and written files.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dispersion model from measured GVD or the waveguide proxy.
    Dispersion(DispersionArgs),
    /// Phase-matching contour over a pump range.
    Phasematch(PhasematchArgs),
    /// Joint spectral intensity and its marginals.
    Jsi(JsiArgs),
    /// Simulated stimulated-emission tomography scan.
    SetScan(SetScanArgs),
    /// Design or simulate a uniform Bragg grating.
    Fbg(FbgArgs),
    /// Heralded marginals of a JSI behind a grating filter.
    Herald(HeraldArgs),
    /// Monte Carlo coincidence histogram and CAR.
    Countsim(CountsimArgs),
    /// CAR and coincidence rate against pump power.
    Sweep(SweepArgs),
    /// Repeat a run from its manifest and verify the outputs.
    Replay(ReplayArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "model_source")]
struct SourceArgs {
    /// CSV of measured D(λ): wavelength_nm,D_ps_nm_km[,sigma].
    #[arg(long)]
    gvd: Option<PathBuf>,
    /// Step-index proxy JSON.
    #[arg(long)]
    proxy: Option<PathBuf>,
    /// Use the nominal fibre design.
    #[arg(long)]
    design: bool,
}

#[derive(Args)]
struct DispersionArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Polynomial degree of the GVD fit.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Model identifier (default: the input file stem, or "design").
    #[arg(long)]
    id: Option<String>,
    /// Exported D(λ) curve as START:STOP:POINTS nm.
    #[arg(long, value_parser = parse_grid)]
    curve: Option<SpectralGrid>,
}

#[derive(Args)]
struct PhasematchArgs {
    #[arg(long)]
    model: PathBuf,
    /// Single pump wavelength, nm.
    #[arg(long, conflicts_with_all = ["pump_start", "pump_stop", "points"])]
    pump: Option<f64>,
    #[arg(long, requires = "pump_stop")]
    pump_start: Option<f64>,
    #[arg(long, requires = "pump_start")]
    pump_stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Signal search window as LO:HI nm.
    #[arg(long, value_parser = parse_pair)]
    signal_window: Option<(f64, f64)>,
    /// Nonlinear coefficient, 1/(W km).
    #[arg(long, default_value_t = FwmParams::default().gamma_per_w_km)]
    gamma: f64,
    /// Peak pump power, W.
    #[arg(long, default_value_t = 0.0)]
    peak_power: f64,
}

#[derive(Args, Clone)]
struct JsiArgs {
    #[arg(long)]
    model: PathBuf,
    /// Pump centre, nm.
    #[arg(long, default_value_t = 1064.0)]
    pump_nm: f64,
    /// Pump intensity FWHM, nm.
    #[arg(long, default_value_t = 1.0)]
    pump_fwhm: f64,
    /// gaussian or sech2.
    #[arg(long, default_value = "gaussian")]
    pump_shape: String,
    /// Measured pump spectrum CSV (wavelength_nm,intensity); replaces the shape.
    #[arg(long)]
    pump_spectrum: Option<PathBuf>,
    /// Fibre length, m.
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    #[arg(long, default_value_t = FwmParams::default().gamma_per_w_km)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    peak_power: f64,
    /// Signal axis START:STOP:POINTS nm.
    #[arg(long, value_parser = parse_grid, default_value = "780:840:512")]
    signal: SpectralGrid,
    /// Idler axis START:STOP:POINTS nm.
    #[arg(long, value_parser = parse_grid, default_value = "1450:1580:2048")]
    idler: SpectralGrid,
}

#[derive(Args)]
struct SetScanArgs {
    #[command(flatten)]
    jsi: JsiArgs,
    #[arg(long, requires_all = ["seed_stop_nm", "seed_count"])]
    seed_start_nm: Option<f64>,
    #[arg(long, requires = "seed_start_nm")]
    seed_stop_nm: Option<f64>,
    #[arg(long, requires = "seed_start_nm")]
    seed_count: Option<usize>,
}

#[derive(Args)]
struct FbgArgs {
    /// Design a grating for the targets below.
    #[arg(long, conflicts_with = "spec", requires_all = ["bragg", "fwhm", "contrast"])]
    design: bool,
    /// Simulate an existing grating spec JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Bragg wavelength, nm.
    #[arg(long)]
    bragg: Option<f64>,
    /// Reflection FWHM target, nm.
    #[arg(long)]
    fwhm: Option<f64>,
    /// Transmission contrast target, dB.
    #[arg(long)]
    contrast: Option<f64>,
    /// Effective index of the guided mode.
    #[arg(long, default_value_t = 1.45)]
    neff: f64,
    /// Exported spectrum START:STOP:POINTS nm (default: Bragg ± 2 nm).
    #[arg(long, value_parser = parse_grid)]
    spectrum: Option<SpectralGrid>,
}

#[derive(Args)]
struct HeraldArgs {
    /// JSI matrix written by `jsi`.
    #[arg(long)]
    jsi: PathBuf,
    /// JSI sidecar (default: the matrix path with a .json extension).
    #[arg(long)]
    jsi_metadata: Option<PathBuf>,
    /// Grating design, grating spec or sampled filter JSON.
    #[arg(long)]
    filter: PathBuf,
    /// Out-of-band reflection floor, dB (≤ 0).
    #[arg(long, allow_hyphen_values = true)]
    floor_db: Option<f64>,
    /// Sampling step of the grating response, nm.
    #[arg(long, default_value_t = 0.001)]
    filter_step: f64,
}

#[derive(Args)]
struct CountsimArgs {
    /// Pulse slots to simulate (accepts 1e7).
    #[arg(long, value_parser = parse_count, default_value = "1e7")]
    pulses: u64,
    /// Pump power, mW; μ = k·P².
    #[arg(long, conflicts_with = "mu")]
    power: Option<f64>,
    /// Mean pairs per pulse.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Pulse slots per power (default: the preset's).
    #[arg(long, value_parser = parse_count)]
    pulses: Option<u64>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    Ok((a.trim().parse().map_err(|_| format!("bad number '{a}'"))?, b.trim().parse().map_err(|_| format!("bad number '{b}'"))?))
}

fn parse_grid(s: &str) -> Result<SpectralGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err("expected START:STOP:POINTS".into());
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number '{x}'"));
    let points = parse_count(n)? as usize;
    SpectralGrid::new(num(a)?, num(b)?, points).map_err(|e| e.to_string())
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15 => Ok(x as u64),
        _ => Err(format!("'{s}' is not a non-negative integer")),
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into())
}

fn load_preset(name: Option<&str>, inputs: &mut Inputs) -> CliResult<Preset> {
    let name = name.unwrap_or("paper_replica");
    if PRESET_NAMES.contains(&name) {
        return Ok(Preset::builtin(name)?);
    }
    let path = Path::new(name);
    let text = inputs.read_string(path)?;
    Preset::from_json(&text).map_err(|e| CliError::input(path, e))
}

fn jsi_params(a: &JsiArgs, inputs: &mut Inputs) -> CliResult<JsiParams> {
    let shape = match (&a.pump_spectrum, a.pump_shape.as_str()) {
        (Some(path), _) => {
            let text = inputs.read_string(path)?;
            let samples = read_two_columns(&text).map_err(|e| CliError::input(path, e))?;
            let (wavelength_nm, intensity) = samples.into_iter().unzip();
            PumpShape::Tabulated { wavelength_nm, intensity }
        }
        (None, "gaussian") => PumpShape::Gaussian,
        (None, "sech2") => PumpShape::Sech2,
        (None, other) => return Err(CliError::Usage(format!("unknown pump shape '{other}' (gaussian, sech2)"))),
    };
    Ok(JsiParams {
        model: a.model.clone(),
        pump: PumpEnvelope { center_nm: a.pump_nm, fwhm_nm: a.pump_fwhm, shape },
        fiber_length_m: a.length,
        fwm: FwmParams { gamma_per_w_km: a.gamma, peak_power_w: a.peak_power },
        signal_grid: a.signal,
        idler_grid: a.idler,
    })
}

/// Two numeric columns with a header line.
fn read_two_columns(text: &str) -> pcfpairs::Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let line_no = k as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| pcfpairs::Error::Parse { line: line_no, message: format!("'{s}' is not a number") });
        if cells.len() < 2 {
            return Err(pcfpairs::Error::Parse { line: line_no, message: "expected two columns".into() });
        }
        out.push((num(cells[0])?, num(cells[1])?));
    }
    Ok(out)
}

/// Turns command-line flags into a job. Files read here (presets, pump
/// spectra) are folded into the parameters.
fn resolve(cli: &Cli, inputs: &mut Inputs) -> CliResult<Job> {
    let counting_only = |what: &str| -> CliResult<()> {
        if cli.preset.is_some() {
            return Err(CliError::Usage(format!("--preset applies to countsim and sweep, not {what}")));
        }
        if cli.seed.is_some() {
            return Err(CliError::Usage(format!("--seed applies to countsim and sweep, not {what}")));
        }
        Ok(())
    };
    Ok(match &cli.command {
        Command::Dispersion(a) => {
            counting_only("dispersion")?;
            let (source, id) = match (&a.source.gvd, &a.source.proxy) {
                (Some(path), _) => (ModelSource::Gvd { path: path.clone(), degree: a.degree }, file_stem(path)),
                (None, Some(path)) => (ModelSource::Proxy { path: Some(path.clone()) }, file_stem(path)),
                (None, None) => (ModelSource::Proxy { path: None }, "design".to_string()),
            };
            Job::Dispersion(DispersionParams { id: a.id.clone().unwrap_or(id), source, curve: a.curve })
        }
        Command::Phasematch(a) => {
            counting_only("phasematch")?;
            let (start, stop, points) = match (a.pump, a.pump_start, a.pump_stop) {
                (Some(p), _, _) => (p, p, 1),
                (None, Some(s), Some(e)) => (s, e, a.points.unwrap_or(31)),
                _ => return Err(CliError::Usage("give --pump or --pump-start and --pump-stop".into())),
            };
            Job::Phasematch(PhasematchParams {
                model: a.model.clone(),
                pump_start_nm: start,
                pump_stop_nm: stop,
                points,
                signal_window_nm: a.signal_window,
                fwm: FwmParams { gamma_per_w_km: a.gamma, peak_power_w: a.peak_power },
                solver: SolverOptions::default(),
            })
        }
        Command::Jsi(a) => {
            counting_only("jsi")?;
            Job::Jsi(jsi_params(a, inputs)?)
        }
        Command::SetScan(a) => {
            counting_only("set-scan")?;
            let seeds = match (a.seed_start_nm, a.seed_stop_nm, a.seed_count) {
                (Some(start_nm), Some(stop_nm), Some(count)) => Some(SeedRange { start_nm, stop_nm, count }),
                _ => None,
            };
            Job::SetScan(SetScanParams { jsi: jsi_params(&a.jsi, inputs)?, seeds })
        }
        Command::Fbg(a) => {
            counting_only("fbg")?;
            match (&a.spec, a.design) {
                (Some(path), _) => Job::Fbg(FbgParams::Spec { path: path.clone(), spectrum: a.spectrum }),
                (None, true) => Job::Fbg(FbgParams::Design {
                    bragg_nm: a.bragg.unwrap_or_default(),
                    fwhm_nm: a.fwhm.unwrap_or_default(),
                    contrast_db: a.contrast.unwrap_or_default(),
                    n_eff: a.neff,
                    spectrum: a.spectrum,
                }),
                (None, false) => return Err(CliError::Usage("give --design with targets, or --spec FILE".into())),
            }
        }
        Command::Herald(a) => {
            counting_only("herald")?;
            Job::Herald(HeraldParams {
                jsi: a.jsi.clone(),
                jsi_metadata: a.jsi_metadata.clone().unwrap_or_else(|| a.jsi.with_extension("json")),
                filter: a.filter.clone(),
                floor_db: a.floor_db,
                filter_step_nm: a.filter_step,
            })
        }
        Command::Countsim(a) => {
            let preset = load_preset(cli.preset.as_deref(), inputs)?;
            let counting = match a.mu {
                Some(mu) => CountingConfig { mean_pairs: mu, ..preset.counting },
                None => preset.counting,
            };
            Job::Countsim(CountsimParams {
                counting,
                power_mw: a.power,
                pulses: a.pulses,
                seed: cli.seed.unwrap_or(preset.seed),
                peak_halfwidth_ns: preset.sweep.peak_halfwidth_ns,
            })
        }
        Command::Sweep(a) => {
            let preset = load_preset(cli.preset.as_deref(), inputs)?;
            let mut sweep = preset.sweep;
            if let Some(n) = a.pulses {
                sweep.pulses_per_point = n;
            }
            Job::Sweep(SweepParams { counting: preset.counting, sweep, seed: cli.seed.unwrap_or(preset.seed) })
        }
        Command::Replay(_) => unreachable!("replay is handled separately"),
    })
}

fn execute(job: &Job, mut inputs: Inputs, out_dir: &Path, verbose: u8) -> CliResult<Manifest> {
    if verbose > 0 {
        eprintln!("{} parameters:\n{}", job.command(), serde_json::to_string_pretty(&job.params()).unwrap_or_default());
    }
    let mut out = Outputs::new(out_dir)?;
    for line in job.execute(&mut inputs, &mut out)? {
        println!("{line}");
    }
    let manifest = Manifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: job.command().into(),
        seed: job.seed(),
        params: job.params(),
        inputs: inputs.records,
        outputs: out.records.clone(),
    };
    out.put_json("manifest.json", &manifest)?;
    if verbose > 0 {
        for f in &manifest.outputs {
            eprintln!("wrote {}", out.path(&f.path).display());
        }
    }
    Ok(manifest)
}

fn replay(cli: &Cli, manifest_path: &Path) -> CliResult<()> {
    if cli.seed.is_some() || cli.preset.is_some() || !cli.set.is_empty() {
        return Err(CliError::Usage("replay takes every parameter from the manifest".into()));
    }
    let mut scratch = Inputs::default();
    let text = scratch.read_string(manifest_path)?;
    let recorded: Manifest = serde_json::from_str(&text).map_err(|e| CliError::input(manifest_path, e))?;
    if recorded.tool != TOOL {
        return Err(CliError::Usage(format!("{} was not written by {TOOL}", manifest_path.display())));
    }
    let job = Job::from_parts(&recorded.command, recorded.params.clone())?;
    let mut inputs = Inputs::default();
    for rec in &recorded.inputs {
        inputs.read(Path::new(&rec.path))?;
    }
    if inputs.records != recorded.inputs {
        return Err(CliError::Usage("input files changed since the recorded run".into()));
    }
    let fresh = execute(&job, inputs, &cli.out, cli.verbose)?;
    let differing: Vec<&str> = recorded
        .outputs
        .iter()
        .filter(|r| !fresh.outputs.contains(r))
        .map(|r| r.path.as_str())
        .collect();
    if !differing.is_empty() || fresh.outputs.len() != recorded.outputs.len() {
        return Err(CliError::Mismatch(format!("replay differs from the recorded run: {}", differing.join(", "))));
    }
    println!("reproduced {} outputs of '{}'", fresh.outputs.len(), recorded.command);
    Ok(())
}

fn main_inner(cli: &Cli) -> CliResult<()> {
    if let Command::Replay(r) = &cli.command {
        return replay(cli, &r.manifest);
    }
    let mut inputs = Inputs::default();
    let job = resolve(cli, &mut inputs)?;
    let job = if cli.set.is_empty() {
        job
    } else {
        let mut params = job.params();
        apply_overrides(&mut params, &cli.set)?;
        Job::from_parts(job.command(), params)?
    };
    execute(&job, inputs, &cli.out, cli.verbose).map(|_| ())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Lib(pcfpairs::Error::Design { frontier, .. }) = &e {
                for (l, w) in frontier {
                    eprintln!("  reachable: {l} mm -> FWHM {w:.4} nm");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
