use pcfpairs::fbg::*;
use pcfpairs::spectral::{fwhm, SpectralGrid};
use pcfpairs::Error;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;

fn designed() -> GratingDesign {
    design_uniform(1556.0, 0.2, 17.5, 1.45).unwrap()
}

fn around(center: f64, half: f64, points: usize) -> SpectralGrid {
    SpectralGrid::new(center - half, center + half, points).unwrap()
}

#[test]
fn design_round_trip_on_resimulated_spectrum() {
    let d = designed();
    let lb = d.spec.bragg_nm();
    let s = spectrum_analytic(&d.spec, &around(lb, 1.0, 20001)).unwrap();
    let w = fwhm(&s.wavelength_nm, &s.reflectance).unwrap();
    assert!((w - 0.2).abs() < 0.002, "fwhm {w}");
    let t_min = s.transmittance.iter().cloned().fold(1.0, f64::min);
    let contrast = -10.0 * t_min.log10();
    assert!((contrast - 17.5).abs() < 0.175, "contrast {contrast}");
    // the physical scale of the solution
    assert!(d.spec.length_mm > 5.0 && d.spec.length_mm < 12.0, "{:?}", d.spec);
    assert!((d.spec.kappa_length() - 2.70).abs() < 0.01);
}

#[test]
fn fifty_millimetres_is_too_narrow() {
    let d = designed();
    assert_eq!(d.reference_length_mm, 50.0);
    assert!(!d.reference_length_feasible);
    assert!(d.reference_length_fwhm_nm < 0.1);
}

#[test]
fn single_section_tmm_equals_closed_form() {
    let d = designed();
    let mut rng = Pcg64Mcg::seed_from_u64(11);
    for _ in 0..100 {
        let l = 1556.0 + rng.random_range(-3.0..3.0);
        let g = SpectralGrid::new(l, l + 1e-3, 2).unwrap();
        let tmm = reflectance_tmm(&d.spec, &g, 1).unwrap();
        let (r, t) = reflectance_analytic(&d.spec, l).unwrap();
        assert!((tmm.reflectance[0] - r).abs() < 1e-10);
        assert!((tmm.transmittance[0] - t).abs() < 1e-10);
    }
}

#[test]
fn many_sections_match_over_stop_band() {
    let d = designed();
    let g = around(d.spec.bragg_nm(), 0.5, 1001);
    let tmm = reflectance_tmm(&d.spec, &g, 200).unwrap();
    let exact = spectrum_analytic(&d.spec, &g).unwrap();
    for k in 0..g.points {
        assert!((tmm.reflectance[k] - exact.reflectance[k]).abs() < 1e-10);
        assert!((tmm.reflectance[k] + tmm.transmittance[k] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn splitting_segments_is_invisible() {
    let mut rng = Pcg64Mcg::seed_from_u64(5);
    for _ in 0..20 {
        let a = GratingSegment { length_mm: rng.random_range(1.0..20.0), delta_n: rng.random_range(1e-5..3e-4), visibility: rng.random_range(0.5..1.0) };
        let b = GratingSegment { length_mm: rng.random_range(1.0..20.0), delta_n: rng.random_range(1e-5..3e-4), visibility: rng.random_range(0.5..1.0) };
        let half = |s: GratingSegment| GratingSegment { length_mm: 0.5 * s.length_mm, ..s };
        let g = SpectralGrid::new(1554.0, 1558.0, 81).unwrap();
        let whole = reflectance_tmm_segments(536.55, 1.45, &[a, b], &g).unwrap();
        let split = reflectance_tmm_segments(536.55, 1.45, &[half(a), half(a), half(b), half(b)], &g).unwrap();
        for k in 0..g.points {
            assert!((whole.reflectance[k] - split.reflectance[k]).abs() < 1e-12);
            assert!((whole.transmittance[k] - split.transmittance[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn floor_sets_peak_to_background() {
    let d = designed();
    let g = SpectralGrid::new(1540.0, 1572.0, 32001).unwrap();
    let plain = as_idler_filter(&d.spec, &g, None).unwrap();
    assert_eq!(plain.responses(), plain.reflectance);
    let f = as_idler_filter(&d.spec, &g, Some(-17.5)).unwrap();
    let resp = f.responses();
    let peak = resp.iter().cloned().fold(0.0, f64::max);
    let edge = resp[0];
    let ratio_db = 10.0 * (peak / edge).log10();
    assert!((ratio_db - 17.5).abs() < 0.1, "{ratio_db}");
    let exact = reflection_fwhm_nm(&d.spec).unwrap();
    assert!((plain.fwhm_nm().unwrap() - exact).abs() < g.step_nm());
}

#[test]
fn filter_grid_must_cover_stop_band() {
    let d = designed();
    let g = SpectralGrid::new(1553.0, 1560.0, 100).unwrap();
    assert!(matches!(as_idler_filter(&d.spec, &g, None), Err(Error::Validation(_))));
}

#[test]
fn spectrum_csv_header() {
    let d = designed();
    let s = spectrum_analytic(&d.spec, &around(1556.0, 1.0, 5)).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("wavelength_nm,R,T,T_db\n"));
}

proptest! {
    #[test]
    fn lossless_and_symmetric(l_mm in 0.5f64..80.0, dn in 0.0f64..5e-4, v in 0.0f64..=1.0, off in 0.0f64..4.0) {
        let spec = GratingSpec { length_mm: l_mm, period_nm: 536.55, n_eff: 1.45, delta_n: dn, visibility: v };
        let lb = spec.bragg_nm();
        let (r, t) = reflectance_analytic(&spec, lb + off).unwrap();
        prop_assert!((r + t - 1.0).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&r) && (0.0..=1.0).contains(&t));
        // mirror in detuning, not in wavelength
        let delta = spec.detuning_per_m(lb + off);
        let mirrored = spec.wavelength_at_detuning(-delta);
        let (r2, _) = reflectance_analytic(&spec, mirrored).unwrap();
        prop_assert!((r - r2).abs() < 1e-9);
    }

    #[test]
    fn design_round_trip_random_targets(fwhm_nm in 0.08f64..1.0, contrast in 3.0f64..30.0) {
        let d = design_uniform(1550.0, fwhm_nm, contrast, 1.447).unwrap();
        prop_assert!((d.fwhm_nm / fwhm_nm - 1.0).abs() < 0.01);
        prop_assert!((d.transmission_contrast_db / contrast - 1.0).abs() < 0.01);
    }
}
