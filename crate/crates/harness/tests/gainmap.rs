use num_complex::Complex64;
use omnisurf_channel::{path_amplitude, CVector};
use omnisurf_geometry::{ArrayGeometry, Point3};
use omnisurf_harness::gainmap::{beam_gain_map, proposed_gain_map, SliceGrid};
use omnisurf_harness::{Environment, ScenarioConfig};
use omnisurf_training::Beam;

#[test]
fn single_element_field_falls_with_distance_only() {
    let lambda = 299_792_458.0 / 26e9;
    let ios = ArrayGeometry::uniform(Point3::new(0.0, 0.0, 0.0), 1, 1, lambda / 2.0).unwrap();
    let one = CVector::from_element(1, Complex64::new(0.6, 0.0));
    let beam = Beam { target: one.clone(), reflective: one.clone(), refractive: CVector::from_element(1, Complex64::new(0.0, 0.8)) };
    let grid = SliceGrid::new(0.5, 0.5, 11, 10, 0.0).unwrap();
    let map = beam_gain_map(&beam, &ios, lambda, (0.6, 0.8), &grid).unwrap();
    for (x, y, g) in map.samples() {
        let amp = if y > 0.0 { 0.6 } else { 0.8 };
        let want = amp * path_amplitude((x * x + y * y).sqrt());
        assert!((g - want).abs() <= 1e-12 * want, "{x} {y}: {g} vs {want}");
    }
}

#[test]
fn proposed_beam_is_mirrored() {
    let env = Environment::new(ScenarioConfig::desk()).unwrap();
    let map = proposed_gain_map(&env).unwrap();
    let c = &map.check;
    assert!(c.peaks_mirrored, "{c:?}");
    assert!(c.ratio_error() < 1e-6, "{c:?}");
    assert_eq!(map.samples().count(), env.config.gainmap.nx * env.config.gainmap.ny);
}

#[test]
fn mirror_rows_are_symmetric() {
    let g = SliceGrid::new(1.0, 1.0, 5, 8, 0.0).unwrap();
    for j in 0..g.ys.len() {
        assert_eq!(g.ys[j], -g.ys[g.mirror_row(j)]);
    }
    assert!(SliceGrid::new(1.0, 1.0, 5, 7, 0.0).is_err());
}

#[test]
fn unequal_split_changes_the_ratio() {
    let mut cfg = ScenarioConfig::desk();
    cfg.surface.gamma_t = 0.9;
    let env = Environment::new(cfg).unwrap();
    let map = proposed_gain_map(&env).unwrap();
    let want = 0.9 / (1.0f64 - 0.81).sqrt();
    assert!((map.check.ratio - want).abs() / want < 1e-6);
}
