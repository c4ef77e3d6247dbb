//! Measured GVD samples and least-squares polynomial fits of D(λ).

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::numeric::bisect;
use crate::{Error, Result};

/// One measured point of the dispersion parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GvdSample {
    pub wavelength_nm: f64,
    /// D in ps/(nm·km).
    pub d: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GvdSamples {
    points: Vec<GvdSample>,
}

impl GvdSamples {
    pub fn new(points: Vec<GvdSample>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("no GVD samples"));
        }
        for (k, p) in points.iter().enumerate() {
            if !(p.wavelength_nm > 0.0 && p.wavelength_nm.is_finite()) {
                return Err(Error::validation(format!("sample {k}: wavelength must be positive")));
            }
            if !p.d.is_finite() {
                return Err(Error::validation(format!("sample {k}: D is not finite")));
            }
            if let Some(s) = p.sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::validation(format!("sample {k}: sigma must be positive")));
                }
            }
            if k > 0 && p.wavelength_nm <= points[k - 1].wavelength_nm {
                return Err(Error::validation(format!("sample {k}: wavelengths must be strictly increasing")));
            }
        }
        Ok(GvdSamples { points })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(wavelength_nm, d)| GvdSample { wavelength_nm, d, sigma: None })
                .collect(),
        )
    }

    pub fn points(&self) -> &[GvdSample] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn range_nm(&self) -> (f64, f64) {
        (self.points[0].wavelength_nm, self.points[self.points.len() - 1].wavelength_nm)
    }

    /// Parses `wavelength_nm,D_ps_nm_km[,sigma]` CSV. Errors carry the
    /// 1-based line number of the offending record.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
        let names: Vec<&str> = header.iter().collect();
        let with_sigma = match names.as_slice() {
            ["wavelength_nm", "D_ps_nm_km"] => false,
            ["wavelength_nm", "D_ps_nm_km", "sigma"] => true,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header wavelength_nm,D_ps_nm_km[,sigma], found {}", names.join(",")),
                })
            }
        };
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let expected = if with_sigma { 3 } else { 2 };
            if record.len() != expected {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {expected} fields, found {}", record.len()),
                });
            }
            let field = |i: usize, name: &str| -> Result<f64> {
                record[i].parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("{name} is not a number: {:?}", &record[i]),
                })
            };
            let wavelength_nm = field(0, "wavelength_nm")?;
            let d = field(1, "D_ps_nm_km")?;
            let sigma = if with_sigma { Some(field(2, "sigma")?) } else { None };
            points.push(GvdSample { wavelength_nm, d, sigma });
        }
        Self::new(points)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }
}

/// D(λ) as a polynomial in the scaled wavelength t = (λ − center)/half_span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GvdPolynomial {
    pub center_nm: f64,
    pub half_span_nm: f64,
    /// Ascending powers of t; D in ps/(nm·km).
    pub coefficients: Vec<f64>,
}

impl GvdPolynomial {
    #[inline]
    pub fn eval(&self, wavelength_nm: f64) -> f64 {
        let t = (wavelength_nm - self.center_nm) / self.half_span_nm;
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Zero-dispersion wavelengths inside `[lo, hi]` nm, ascending.
    pub fn zero_dispersion_nm(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        const SCAN: usize = 4000;
        let mut roots = Vec::new();
        let step = (hi - lo) / SCAN as f64;
        let mut x0 = lo;
        let mut f0 = self.eval(x0);
        if f0 == 0.0 {
            roots.push(x0);
        }
        for k in 1..=SCAN {
            let x1 = if k == SCAN { hi } else { lo + k as f64 * step };
            let f1 = self.eval(x1);
            if f1 == 0.0 {
                roots.push(x1);
            } else if f0 != 0.0 && f0.signum() != f1.signum() {
                roots.push(bisect(|x| Ok(self.eval(x)), x0, x1, 0.0, 0.0)?.root);
            }
            x0 = x1;
            f0 = f1;
        }
        Ok(roots)
    }
}

/// Result of [`fit_gvd`]: the polynomial plus per-sample residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GvdFit {
    pub polynomial: GvdPolynomial,
    pub domain_nm: (f64, f64),
    /// Measured minus fitted D at each sample, ps/(nm·km).
    pub residuals: Vec<f64>,
    pub rms_residual: f64,
}

/// Singular values below this fraction of the largest mark the design matrix
/// as rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;

/// Least-squares polynomial fit of D(λ). Samples with uncertainties are
/// weighted by 1/σ²; when any sample lacks σ the fit is unweighted.
pub fn fit_gvd_polynomial(samples: &GvdSamples, degree: usize) -> Result<GvdFit> {
    if degree < 2 {
        return Err(Error::validation(format!("fit degree must be at least 2, got {degree}")));
    }
    let n = samples.len();
    if degree >= n {
        return Err(Error::validation(format!("degree {degree} needs more than {degree} samples, got {n}")));
    }
    let (lo, hi) = samples.range_nm();
    let center_nm = 0.5 * (lo + hi);
    let half_span_nm = 0.5 * (hi - lo);
    let weighted = samples.points().iter().all(|p| p.sigma.is_some());

    let cols = degree + 1;
    let mut a = DMatrix::<f64>::zeros(n, cols);
    let mut y = DVector::<f64>::zeros(n);
    for (i, p) in samples.points().iter().enumerate() {
        let w = if weighted { 1.0 / p.sigma.unwrap() } else { 1.0 };
        let t = (p.wavelength_nm - center_nm) / half_span_nm;
        let mut tk = 1.0;
        for j in 0..cols {
            a[(i, j)] = w * tk;
            tk *= t;
        }
        y[i] = w * p.d;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(Error::Fit(format!(
            "design matrix is rank deficient (singular value ratio {:e})",
            smin / smax
        )));
    }
    let coef = svd
        .solve(&y, RANK_TOLERANCE * smax)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let polynomial = GvdPolynomial {
        center_nm,
        half_span_nm,
        coefficients: coef.iter().copied().collect(),
    };
    let residuals: Vec<f64> = samples
        .points()
        .iter()
        .map(|p| p.d - polynomial.eval(p.wavelength_nm))
        .collect();
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    Ok(GvdFit {
        polynomial,
        domain_nm: (lo, hi),
        residuals,
        rms_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_samples_fit_exactly() {
        let f = |l: f64| 3e-5 * (l - 1000.0).powi(2) - 0.07 * l + 40.0;
        let pairs: Vec<_> = (0..9).map(|k| (800.0 + 50.0 * k as f64, f(800.0 + 50.0 * k as f64))).collect();
        let fit = fit_gvd_polynomial(&GvdSamples::from_pairs(&pairs).unwrap(), 2).unwrap();
        for (r, (_, d)) in fit.residuals.iter().zip(&pairs) {
            assert!((r / d).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_zero_dispersion_recovered() {
        let l0 = 1287.3;
        let pairs: Vec<_> = (0..12).map(|k| {
            let l = 900.0 + 70.0 * k as f64;
            (l, 0.08 * (l - l0))
        }).collect();
        let fit = fit_gvd_polynomial(&GvdSamples::from_pairs(&pairs).unwrap(), 3).unwrap();
        let z = fit.polynomial.zero_dispersion_nm(900.0, 1670.0).unwrap();
        assert_eq!(z.len(), 1);
        assert!(((z[0] - l0) / l0).abs() < 1e-6);
    }

    #[test]
    fn degree_checks() {
        let s = GvdSamples::from_pairs(&[(800.0, -1.0), (900.0, 0.0), (1000.0, 1.0)]).unwrap();
        assert!(matches!(fit_gvd_polynomial(&s, 3), Err(Error::Validation(_))));
        assert!(matches!(fit_gvd_polynomial(&s, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_unsorted_samples() {
        assert!(GvdSamples::from_pairs(&[(900.0, 1.0), (800.0, 2.0)]).is_err());
        assert!(GvdSamples::from_pairs(&[(-5.0, 1.0), (800.0, 2.0)]).is_err());
    }

    #[test]
    fn csv_diagnostics_carry_line_numbers() {
        let text = "wavelength_nm,D_ps_nm_km\n800,-3\n900,abc\n";
        match GvdSamples::from_csv_reader(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_header = "lambda,D\n800,1\n";
        assert!(matches!(GvdSamples::from_csv_reader(bad_header.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let ok = "wavelength_nm,D_ps_nm_km,sigma\n800,-3,1.5\n900,-1,1.5\n";
        let s = GvdSamples::from_csv_reader(ok.as_bytes()).unwrap();
        assert_eq!(s.points()[1].sigma, Some(1.5));
    }

    #[test]
    fn fit_is_deterministic() {
        let pairs: Vec<_> = (0..13).map(|k| (750.0 + 75.0 * k as f64, (k as f64).sin() * 30.0)).collect();
        let s = GvdSamples::from_pairs(&pairs).unwrap();
        let a = fit_gvd_polynomial(&s, 5).unwrap();
        let b = fit_gvd_polynomial(&s, 5).unwrap();
        assert_eq!(a, b);
    }
}
