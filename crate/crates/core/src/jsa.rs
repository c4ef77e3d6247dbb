//! Joint spectral intensity of the photon pair, stimulated-emission
//! tomography scans and heralded marginals behind an idler filter.
//!
//! The JSA is modelled as the product of the pump envelope, evaluated at the
//! two-photon total frequency, and the sinc phase-matching function of a
//! uniform fibre of length L.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::fbg::SpectralFilter;
use crate::phasematch::{mismatch, FwmParams};
use crate::spectral::{fwhm, SpectralGrid};
use crate::units::{omega_from_nm, omega_width_from_nm};
use crate::{Error, Result};

/// Spectral shape of the pump intensity |α|².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PumpShape {
    Gaussian,
    Sech2,
    /// Measured spectrum: intensity samples against wavelength (nm),
    /// interpolated linearly in frequency and zero outside the table.
    Tabulated { wavelength_nm: Vec<f64>, intensity: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpEnvelope {
    pub center_nm: f64,
    /// FWHM of |α|², nm. Not used by tabulated shapes.
    pub fwhm_nm: f64,
    pub shape: PumpShape,
}

/// Frequency-offset table of a tabulated pump, normalised to unit area.
struct Table {
    offsets: Vec<f64>,
    values: Vec<f64>,
}

impl PumpEnvelope {
    pub fn gaussian(center_nm: f64, fwhm_nm: f64) -> Self {
        PumpEnvelope { center_nm, fwhm_nm, shape: PumpShape::Gaussian }
    }

    pub fn sech2(center_nm: f64, fwhm_nm: f64) -> Self {
        PumpEnvelope { center_nm, fwhm_nm, shape: PumpShape::Sech2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_nm > 0.0) {
            return Err(Error::validation("pump centre must be positive"));
        }
        match &self.shape {
            PumpShape::Tabulated { wavelength_nm, intensity } => {
                if wavelength_nm.len() < 2 || wavelength_nm.len() != intensity.len() {
                    return Err(Error::validation("tabulated pump needs matching arrays of at least two samples"));
                }
                if wavelength_nm.windows(2).any(|w| !(w[1] > w[0])) || wavelength_nm[0] <= 0.0 {
                    return Err(Error::validation("tabulated pump wavelengths must be positive and increasing"));
                }
                if intensity.iter().any(|v| !(*v >= 0.0 && v.is_finite())) || !intensity.iter().any(|v| *v > 0.0) {
                    return Err(Error::validation("tabulated pump intensity must be non-negative and not all zero"));
                }
            }
            _ => {
                if !(self.fwhm_nm > 0.0 && self.fwhm_nm.is_finite()) {
                    return Err(Error::validation("pump FWHM must be positive"));
                }
            }
        }
        Ok(())
    }

    /// FWHM in angular frequency, rad/s.
    pub fn fwhm_omega(&self) -> f64 {
        omega_width_from_nm(self.center_nm, self.fwhm_nm)
    }

    fn table(&self) -> Option<Table> {
        let PumpShape::Tabulated { wavelength_nm, intensity } = &self.shape else {
            return None;
        };
        let w0 = omega_from_nm(self.center_nm);
        // Reverse so that frequency offsets increase.
        let offsets: Vec<f64> = wavelength_nm.iter().rev().map(|&l| omega_from_nm(l) - w0).collect();
        let raw: Vec<f64> = intensity.iter().rev().copied().collect();
        let area: f64 = offsets.windows(2).zip(raw.windows(2)).map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0])).sum();
        Some(Table { offsets, values: raw.iter().map(|v| v / area).collect() })
    }

    /// A reusable evaluator of |α|² at a frequency offset from the centre.
    fn evaluator(&self) -> impl Fn(f64) -> f64 + Sync + '_ {
        let table = self.table();
        let width = self.fwhm_omega();
        move |offset: f64| match &self.shape {
            PumpShape::Gaussian => {
                let sigma = width / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
                (-0.5 * (offset / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            PumpShape::Sech2 => {
                // FWHM of sech²(x/T) is 2·T·acosh(√2).
                let t = width / (2.0 * std::f64::consts::SQRT_2.acosh());
                let c = 1.0 / (offset / t).cosh();
                c * c / (2.0 * t)
            }
            PumpShape::Tabulated { .. } => {
                let tab = table.as_ref().expect("table built for tabulated pump");
                let x = &tab.offsets;
                if offset < x[0] || offset > x[x.len() - 1] {
                    return 0.0;
                }
                let k = x.partition_point(|&v| v <= offset).clamp(1, x.len() - 1);
                let f = (offset - x[k - 1]) / (x[k] - x[k - 1]);
                tab.values[k - 1] + f * (tab.values[k] - tab.values[k - 1])
            }
        }
    }

    /// |α|² at angular-frequency offset `offset` from the centre; unit area
    /// over offset.
    pub fn intensity_at_offset(&self, offset: f64) -> f64 {
        (self.evaluator())(offset)
    }
}

/// sinc(x) = sin(x)/x with sinc(0) = 1.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching amplitude sinc(ΔβL/2)·exp(iΔβL/2) for a signal/idler pair
/// pumped at their mean frequency.
pub fn phasematch_amplitude(model: &DispersionModel, params: &FwmParams, length_m: f64, omega_s: f64, omega_i: f64) -> Result<Complex64> {
    if !(length_m > 0.0) {
        return Err(Error::validation("fibre length must be positive"));
    }
    let x = 0.5 * mismatch(model, params, 0.5 * (omega_s + omega_i), omega_s)? * length_m;
    Ok(Complex64::from_polar(sinc(x), x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsiMetadata {
    pub fiber_length_m: f64,
    pub model_id: String,
    pub pump: PumpEnvelope,
    pub params: FwmParams,
    /// Largest unnormalised intensity on the grid.
    pub raw_max: f64,
    /// Set when the grid barely overlaps the phase-matched, pump-allowed
    /// region (raw maximum below 10⁻³ of the ideal peak).
    pub overlap_warning: bool,
}

/// Intensity on a (signal, idler) wavelength grid. Row-major with one row per
/// idler wavelength and one column per signal wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpectrum {
    pub signal_grid: SpectralGrid,
    pub idler_grid: SpectralGrid,
    pub intensity: Vec<f64>,
    pub metadata: JsiMetadata,
}

impl JointSpectrum {
    #[inline]
    pub fn at(&self, idler_index: usize, signal_index: usize) -> f64 {
        self.intensity[idler_index * self.signal_grid.points + signal_index]
    }

    pub fn row(&self, idler_index: usize) -> &[f64] {
        let n = self.signal_grid.points;
        &self.intensity[idler_index * n..(idler_index + 1) * n]
    }

    /// Unfiltered marginals (idler, signal).
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let ns = self.signal_grid.points;
        let mut signal = vec![0.0; ns];
        let idler = (0..self.idler_grid.points)
            .map(|i| {
                let row = self.row(i);
                for (acc, v) in signal.iter_mut().zip(row) {
                    *acc += v;
                }
                row.iter().sum()
            })
            .collect();
        (idler, signal)
    }

    /// CSV matrix: the first row holds the signal axis, each further row an
    /// idler wavelength followed by its intensities.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["idler_nm\\signal_nm".to_string()];
        header.extend(self.signal_grid.wavelengths().iter().map(|l| l.to_string()));
        w.write_record(&header)?;
        for i in 0..self.idler_grid.points {
            let mut rec = vec![self.idler_grid.wavelength(i).to_string()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a matrix written by [`JointSpectrum::write_csv`] together with
    /// its sidecar. Axes must match the sidecar grids exactly.
    pub fn read(csv_path: impl AsRef<Path>, sidecar_path: impl AsRef<Path>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Sidecar {
            signal_grid: SpectralGrid,
            idler_grid: SpectralGrid,
            metadata: JsiMetadata,
        }
        let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
        side.signal_grid.validate()?;
        side.idler_grid.validate()?;
        let parse = |line: u64, s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse { line, message: format!("'{s}' is not a number") });
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(csv_path)?;
        let mut records = reader.records();
        let header = records.next().ok_or(Error::Parse { line: 1, message: "empty file".into() })??;
        if header.len() != side.signal_grid.points + 1 {
            return Err(Error::Parse { line: 1, message: format!("expected {} signal columns", side.signal_grid.points) });
        }
        for (k, cell) in header.iter().skip(1).enumerate() {
            if parse(1, cell)? != side.signal_grid.wavelength(k) {
                return Err(Error::Parse { line: 1, message: format!("signal axis differs from sidecar at column {}", k + 2) });
            }
        }
        let mut intensity = Vec::with_capacity(side.signal_grid.points * side.idler_grid.points);
        let mut rows = 0;
        for (i, rec) in records.enumerate() {
            let line = i as u64 + 2;
            let rec = rec?;
            if i >= side.idler_grid.points || rec.len() != side.signal_grid.points + 1 {
                return Err(Error::Parse { line, message: "row does not fit the sidecar grids".into() });
            }
            if parse(line, &rec[0])? != side.idler_grid.wavelength(i) {
                return Err(Error::Parse { line, message: "idler axis differs from sidecar".into() });
            }
            for cell in rec.iter().skip(1) {
                let v = parse(line, cell)?;
                if !(v >= 0.0) {
                    return Err(Error::Parse { line, message: format!("negative intensity {v}") });
                }
                intensity.push(v);
            }
            rows += 1;
        }
        if rows != side.idler_grid.points {
            return Err(Error::Parse { line: rows as u64 + 2, message: format!("expected {} idler rows, found {rows}", side.idler_grid.points) });
        }
        Ok(JointSpectrum { signal_grid: side.signal_grid, idler_grid: side.idler_grid, intensity, metadata: side.metadata })
    }

    /// JSON sidecar with grids and metadata (no intensity values).
    pub fn metadata_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            signal_grid: &'a SpectralGrid,
            idler_grid: &'a SpectralGrid,
            layout: &'static str,
            metadata: &'a JsiMetadata,
        }
        Ok(serde_json::to_string_pretty(&Sidecar {
            signal_grid: &self.signal_grid,
            idler_grid: &self.idler_grid,
            layout: "rows = idler, columns = signal",
            metadata: &self.metadata,
        })?)
    }
}

/// Per-axis precomputation shared by full grids and SET rows.
struct JsiKernel<'a, F> {
    model: &'a DispersionModel,
    params: FwmParams,
    length_m: f64,
    omega0: f64,
    pump: F,
    signal_omega: Vec<f64>,
    signal_beta: Vec<f64>,
}

impl<'a, F: Fn(f64) -> f64 + Sync> JsiKernel<'a, F> {
    fn new(pump_env: &PumpEnvelope, pump: F, model: &'a DispersionModel, params: &FwmParams, length_m: f64, signal: &SpectralGrid) -> Result<Self> {
        pump_env.validate()?;
        params.validate()?;
        signal.validate()?;
        if !(length_m > 0.0 && length_m.is_finite()) {
            return Err(Error::validation("fibre length must be positive"));
        }
        let signal_omega: Vec<f64> = signal.wavelengths().iter().map(|&l| omega_from_nm(l)).collect();
        let signal_beta = signal_omega.iter().map(|&w| model.beta(w)).collect::<Result<Vec<_>>>()?;
        Ok(JsiKernel {
            model,
            params: *params,
            length_m,
            omega0: omega_from_nm(pump_env.center_nm),
            pump,
            signal_omega,
            signal_beta,
        })
    }

    /// Unnormalised intensities along one idler wavelength.
    fn row(&self, idler_nm: f64) -> Result<Vec<f64>> {
        let wi = omega_from_nm(idler_nm);
        let bi = self.model.beta(wi)?;
        let nl = self.params.nonlinear_term();
        let mut out = Vec::with_capacity(self.signal_omega.len());
        for (&ws, &bs) in self.signal_omega.iter().zip(&self.signal_beta) {
            let p = (self.pump)(ws + wi - 2.0 * self.omega0);
            if p == 0.0 {
                out.push(0.0);
                continue;
            }
            let bp = self.model.beta(0.5 * (ws + wi))?;
            let x = 0.5 * (bs + bi + nl - 2.0 * bp) * self.length_m;
            let s = sinc(x);
            out.push(p * s * s);
        }
        Ok(out)
    }
}

fn finish(raw: Vec<f64>, pump: &PumpEnvelope, model: &DispersionModel, params: &FwmParams, length_m: f64, signal: SpectralGrid, idler: SpectralGrid) -> JointSpectrum {
    let raw_max = raw.iter().cloned().fold(0.0, f64::max);
    // Ideal peak: pump maximum with perfect phase matching.
    let ideal = (pump.evaluator())(0.0).max(f64::MIN_POSITIVE);
    let intensity = if raw_max > 0.0 { raw.iter().map(|v| v / raw_max).collect() } else { raw };
    JointSpectrum {
        signal_grid: signal,
        idler_grid: idler,
        intensity,
        metadata: JsiMetadata {
            fiber_length_m: length_m,
            model_id: model.id().to_string(),
            pump: pump.clone(),
            params: *params,
            raw_max,
            overlap_warning: raw_max < 1e-3 * ideal,
        },
    }
}

/// Joint spectral intensity |α(ω_s + ω_i)|²·|φ(ω_s, ω_i)|² on the grids,
/// normalised to unit maximum. Rows are evaluated in parallel; the result
/// does not depend on scheduling.
pub fn compute_jsi(pump: &PumpEnvelope, model: &DispersionModel, params: &FwmParams, length_m: f64, signal: &SpectralGrid, idler: &SpectralGrid) -> Result<JointSpectrum> {
    idler.validate()?;
    let kernel = JsiKernel::new(pump, pump.evaluator(), model, params, length_m, signal)?;
    let rows = (0..idler.points)
        .into_par_iter()
        .map(|i| kernel.row(idler.wavelength(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(rows.concat(), pump, model, params, length_m, *signal, *idler))
}

/// One seeded measurement of a stimulated-emission tomography scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRow {
    pub seed_nm: f64,
    /// Unnormalised stimulated signal spectrum on the signal grid, or the
    /// reason this seed failed.
    pub spectrum: std::result::Result<Vec<f64>, String>,
}

/// Simulated SET scan: for each idler seed, the stimulated signal spectrum is
/// the JSI row at the seed frequency. Seeds outside the idler grid produce an
/// error entry and the scan continues.
pub fn simulate_set_scan(
    pump: &PumpEnvelope,
    model: &DispersionModel,
    params: &FwmParams,
    length_m: f64,
    signal: &SpectralGrid,
    idler: &SpectralGrid,
    seeds_nm: &[f64],
) -> Result<Vec<SetRow>> {
    idler.validate()?;
    let kernel = JsiKernel::new(pump, pump.evaluator(), model, params, length_m, signal)?;
    Ok(seeds_nm
        .par_iter()
        .map(|&seed| {
            let spectrum = if idler.contains(seed) {
                kernel.row(seed).map_err(|e| e.to_string())
            } else {
                Err(format!("seed {seed} nm outside idler grid [{}, {}] nm", idler.start_nm, idler.stop_nm))
            };
            SetRow { seed_nm: seed, spectrum }
        })
        .collect())
}

/// Rebuilds the JSI from a scan that seeded every idler grid wavelength.
pub fn reassemble_set_scan(
    rows: &[SetRow],
    pump: &PumpEnvelope,
    model: &DispersionModel,
    params: &FwmParams,
    length_m: f64,
    signal: &SpectralGrid,
    idler: &SpectralGrid,
) -> Result<JointSpectrum> {
    let mut slots: Vec<Option<&Vec<f64>>> = vec![None; idler.points];
    for row in rows {
        if let (Some(k), Ok(spec)) = (idler.index_of(row.seed_nm), &row.spectrum) {
            if spec.len() != signal.points {
                return Err(Error::validation("SET row length does not match the signal grid"));
            }
            slots[k] = Some(spec);
        }
    }
    let mut raw = Vec::with_capacity(idler.points * signal.points);
    for (k, slot) in slots.iter().enumerate() {
        match slot {
            Some(spec) => raw.extend_from_slice(spec),
            None => return Err(Error::validation(format!("no SET row for idler grid point {}", idler.wavelength(k)))),
        }
    }
    Ok(finish(raw, pump, model, params, length_m, *signal, *idler))
}

/// Filtered marginals of a JSI and their widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeraldedMarginals {
    pub idler_nm: Vec<f64>,
    pub idler: Vec<f64>,
    pub signal_nm: Vec<f64>,
    pub signal: Vec<f64>,
    pub idler_fwhm_nm: f64,
    pub signal_fwhm_nm: f64,
}

impl HeraldedMarginals {
    pub fn write_idler_csv<W: Write>(&self, out: W) -> Result<()> {
        write_spectrum_csv(&self.idler_nm, &self.idler, out)
    }

    pub fn write_signal_csv<W: Write>(&self, out: W) -> Result<()> {
        write_spectrum_csv(&self.signal_nm, &self.signal, out)
    }
}

/// Two-column `wavelength_nm,intensity` CSV.
pub fn write_spectrum_csv<W: Write>(wavelength_nm: &[f64], intensity: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["wavelength_nm", "intensity"])?;
    for (l, v) in wavelength_nm.iter().zip(intensity) {
        w.write_record([l.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Idler and signal marginals after weighting each idler row by the filter
/// response.
pub fn heralded_marginal(jsi: &JointSpectrum, idler_filter: &SpectralFilter) -> Result<HeraldedMarginals> {
    idler_filter.validate()?;
    let idler_nm = jsi.idler_grid.wavelengths();
    let weights = idler_nm.iter().map(|&l| idler_filter.response_at(l)).collect::<Result<Vec<_>>>()?;
    let ns = jsi.signal_grid.points;
    let mut signal = vec![0.0; ns];
    let mut idler = Vec::with_capacity(idler_nm.len());
    for (i, &f) in weights.iter().enumerate() {
        let row = jsi.row(i);
        let mut acc = 0.0;
        for (s, &v) in signal.iter_mut().zip(row) {
            let x = v * f;
            *s += x;
            acc += x;
        }
        idler.push(acc);
    }
    if !idler.iter().any(|&v| v > 0.0) {
        return Err(Error::EmptySpectrum("the idler filter removes the whole joint spectrum".into()));
    }
    let signal_nm = jsi.signal_grid.wavelengths();
    Ok(HeraldedMarginals {
        idler_fwhm_nm: fwhm(&idler_nm, &idler)?,
        signal_fwhm_nm: fwhm(&signal_nm, &signal)?,
        idler_nm,
        idler,
        signal_nm,
        signal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_pump(p: &PumpEnvelope, half_width: f64) -> f64 {
        let n = 200_000;
        let h = 2.0 * half_width / n as f64;
        (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * p.intensity_at_offset(-half_width + k as f64 * h)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn analytic_pumps_are_normalised_with_declared_width() {
        for p in [PumpEnvelope::gaussian(1064.0, 1.0), PumpEnvelope::sech2(1064.0, 1.0)] {
            let w = p.fwhm_omega();
            assert!((integrate_pump(&p, 40.0 * w) - 1.0).abs() < 1e-6);
            let xs: Vec<f64> = (0..4001).map(|k| -2.0 * w + k as f64 * w / 1000.0).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| p.intensity_at_offset(x)).collect();
            assert!((fwhm(&xs, &ys).unwrap() / w - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn tabulated_pump_normalised() {
        let wl: Vec<f64> = (0..201).map(|k| 1062.0 + 0.02 * k as f64).collect();
        let it: Vec<f64> = wl.iter().map(|l| (-(l - 1064.0f64).powi(2) / 0.2).exp()).collect();
        let p = PumpEnvelope { center_nm: 1064.0, fwhm_nm: 0.0, shape: PumpShape::Tabulated { wavelength_nm: wl, intensity: it } };
        p.validate().unwrap();
        let w = omega_width_from_nm(1064.0, 4.0);
        assert!((integrate_pump(&p, w) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn sinc_limits() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(std::f64::consts::PI).abs() < 1e-15);
    }
}
