//! Uniform wavelength grids and width measurements on sampled spectra.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A uniform wavelength axis in nm, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub points: usize,
}

impl SpectralGrid {
    pub fn new(start_nm: f64, stop_nm: f64, points: usize) -> Result<Self> {
        let grid = SpectralGrid { start_nm, stop_nm, points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_nm > 0.0 && self.stop_nm.is_finite() && self.stop_nm > self.start_nm) {
            return Err(Error::validation(format!(
                "grid must satisfy 0 < start < stop, got [{}, {}]",
                self.start_nm, self.stop_nm
            )));
        }
        if self.points < 2 {
            return Err(Error::validation("grid needs at least two points"));
        }
        Ok(())
    }

    pub fn step_nm(&self) -> f64 {
        (self.stop_nm - self.start_nm) / (self.points - 1) as f64
    }

    #[inline]
    pub fn wavelength(&self, index: usize) -> f64 {
        if index + 1 == self.points {
            self.stop_nm
        } else {
            self.start_nm + index as f64 * self.step_nm()
        }
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.wavelength(k)).collect()
    }

    pub fn contains(&self, wavelength_nm: f64) -> bool {
        wavelength_nm >= self.start_nm && wavelength_nm <= self.stop_nm
    }

    /// Index of a grid point bit-equal to `wavelength_nm`, if any.
    pub fn index_of(&self, wavelength_nm: f64) -> Option<usize> {
        if !self.contains(wavelength_nm) {
            return None;
        }
        let guess = ((wavelength_nm - self.start_nm) / self.step_nm()).round() as usize;
        let lo = guess.saturating_sub(1);
        let hi = (guess + 1).min(self.points - 1);
        (lo..=hi).find(|&k| self.wavelength(k) == wavelength_nm)
    }

    /// Same range with twice the sample density.
    pub fn refined(&self) -> SpectralGrid {
        SpectralGrid { points: 2 * self.points - 1, ..*self }
    }
}

/// Full width at half maximum of a sampled peak.
///
/// Starting from the global maximum the samples are walked outward until one
/// falls strictly below half of the peak; each edge is placed by linear
/// interpolation between that sample and its inner neighbour. When several
/// samples share the maximum, the outermost ones start the walk, so ties
/// resolve to the wider width. A peak that does not drop below half before the
/// end of the axis is an error.
pub fn fwhm(x: &[f64], y: &[f64]) -> Result<f64> {
    let (left, right) = half_max_crossings(x, y)?;
    Ok(right - left)
}

/// Interpolated (left, right) half-maximum positions; see [`fwhm`].
pub fn half_max_crossings(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::validation("fwhm needs matching axes with at least three samples"));
    }
    let peak = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::EmptySpectrum("no positive samples".into()));
    }
    let first = y.iter().position(|&v| v == peak).unwrap();
    let last = y.iter().rposition(|&v| v == peak).unwrap();
    let half = 0.5 * peak;

    let mut left = None;
    for k in (0..first).rev() {
        if y[k] < half {
            left = Some(interpolate_crossing(x[k], y[k], x[k + 1], y[k + 1], half));
            break;
        }
    }
    let mut right = None;
    for k in last + 1..y.len() {
        if y[k] < half {
            right = Some(interpolate_crossing(x[k], y[k], x[k - 1], y[k - 1], half));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => Err(Error::validation("peak does not fall below half maximum inside the axis")),
    }
}

fn interpolate_crossing(x_out: f64, y_out: f64, x_in: f64, y_in: f64, level: f64) -> f64 {
    x_in + (y_in - level) / (y_in - y_out) * (x_out - x_in)
}

/// Intensity-weighted mean of the axis.
pub fn centroid(x: &[f64], y: &[f64]) -> Option<f64> {
    let total: f64 = y.iter().sum();
    if total > 0.0 {
        Some(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / total)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_fwhm() {
        let x: Vec<f64> = (0..2001).map(|k| -10.0 + 0.01 * k as f64).collect();
        let s = 1.3;
        let y: Vec<f64> = x.iter().map(|v| (-v * v / (2.0 * s * s)).exp()).collect();
        let w = fwhm(&x, &y).unwrap();
        let exact = 2.0 * (2.0 * 2f64.ln()).sqrt() * s;
        assert!((w - exact).abs() < 1e-4);
    }

    #[test]
    fn single_cell_peak_is_one_step_wide() {
        let x: Vec<f64> = (0..9).map(|k| k as f64 * 0.5).collect();
        let mut y = vec![0.0; 9];
        y[4] = 1.0;
        assert_eq!(fwhm(&x, &y).unwrap(), 0.5);
    }

    #[test]
    fn flat_top_ties_take_outermost() {
        let x: Vec<f64> = (0..7).map(|k| k as f64).collect();
        let y = vec![0.0, 0.0, 1.0, 0.2, 1.0, 0.0, 0.0];
        // walk starts at the outer maxima, so the dip between them is ignored
        assert_eq!(fwhm(&x, &y).unwrap(), 3.0);
    }

    #[test]
    fn truncated_peak_is_error() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 0.9, 0.2, 0.1];
        assert!(fwhm(&x, &y).is_err());
    }

    #[test]
    fn grid_index_lookup() {
        let g = SpectralGrid::new(1450.0, 1580.0, 2048).unwrap();
        for k in [0, 1, 777, 2047] {
            assert_eq!(g.index_of(g.wavelength(k)), Some(k));
        }
        assert_eq!(g.index_of(1450.0 + 0.5 * g.step_nm()), None);
        assert!((g.refined().step_nm() * 2.0 - g.step_nm()).abs() < 1e-12);
    }
}
