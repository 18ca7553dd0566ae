use std::f64::consts::PI;

use num_complex::Complex64;
use omnisurf_channel::*;
use omnisurf_geometry::*;
use proptest::prelude::*;

fn lam() -> f64 {
    wavelength(26e9).unwrap()
}

fn brute(a: Point3, b: Point3, l: f64) -> Complex64 {
    let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
    Complex64::new(0.0, -2.0 * PI * d / l).exp() / (4.0 * PI * d * d).sqrt()
}

#[test]
fn bs_channel_matches_entrywise_recomputation() {
    let l = lam();
    let ios = ArrayGeometry::uniform(Point3::ORIGIN, 2, 2, l / 2.0).unwrap();
    let bs = ArrayGeometry::uniform(Point3::new(0.13, 0.41, -0.07), 2, 1, l).unwrap();
    let h = bs_ios_channel(&bs, &ios, l).unwrap();
    assert_eq!(h.shape(), (4, 2));
    for (r, e) in ios.element_positions().into_iter().enumerate() {
        for (c, b) in bs.element_positions().into_iter().enumerate() {
            assert!((h[(r, c)] - brute(e, b, l)).norm() < 1e-14);
        }
    }
}

#[test]
fn user_channel_matches_entrywise_recomputation() {
    let l = lam();
    let ios = ArrayGeometry::uniform(Point3::ORIGIN, 8, 8, l / 2.0).unwrap();
    let user = ArrayGeometry::uniform(Point3::new(-0.05, 0.2, 0.01), 2, 2, l / 2.0).unwrap();
    let h = near_field_user_channel(&user, &ios, l).unwrap();
    assert_eq!(h.shape(), (4, 64));
    for (r, u) in user.element_positions().into_iter().enumerate() {
        for (c, e) in ios.element_positions().into_iter().enumerate() {
            let z = h[(r, c)];
            assert!((z - brute(u, e, l)).norm() < 1e-13);
            let d = u.distance(e);
            assert!((z.norm() - (1.0 / (4.0 * PI * d * d)).sqrt()).abs() < 1e-13);
        }
    }
}

#[test]
fn mirrored_users_see_identical_channels() {
    let l = lam();
    let ios = ArrayGeometry::uniform(Point3::ORIGIN, 8, 8, l / 2.0).unwrap();
    let p = Point3::new(0.07, 0.11, -0.02);
    let a = near_field_user_channel(&ArrayGeometry::uniform(p, 2, 1, l / 2.0).unwrap(), &ios, l).unwrap();
    let b = near_field_user_channel(&ArrayGeometry::uniform(mirror_point(p), 2, 1, l / 2.0).unwrap(), &ios, l)
        .unwrap();
    assert_eq!(a, b);
}

/// Max entrywise phase error after removing the best global phase, and max
/// relative magnitude error.
fn model_gap(near: &CMatrix, far: &CMatrix) -> (f64, f64) {
    let align: Complex64 = near.iter().zip(far.iter()).map(|(a, b)| a * b.conj()).sum();
    let rot = Complex64::from_polar(1.0, align.arg());
    let mut ph: f64 = 0.0;
    let mut mag: f64 = 0.0;
    for (a, b) in near.iter().zip(far.iter()) {
        ph = ph.max((a / (b * rot)).arg().abs());
        mag = mag.max((a.norm() - b.norm()).abs() / b.norm());
    }
    (ph, mag)
}

#[test]
fn deep_far_field_user_agrees_with_spherical_model() {
    let l = lam();
    let ios = ArrayGeometry::uniform(Point3::ORIGIN, 8, 8, l / 2.0).unwrap();
    let dir = Direction::new(0.2, 0.6);
    let center = dir.unit_vector() * 200.0;
    let user = ArrayGeometry::uniform(center, 2, 1, l / 2.0).unwrap();
    let near = near_field_user_channel(&user, &ios, l).unwrap();
    let far = user_channel(&user, &ios, l).unwrap();
    assert_eq!(far.model, FieldRegion::Far);
    let (ph, mag) = model_gap(&near, &far.matrix);
    assert!(ph < 0.01 * 2.0 * PI, "phase gap {ph}");
    assert!(mag < 0.01);
}

#[test]
fn mirrored_near_areas_have_equal_magnitudes() {
    let l = lam();
    let ios = ArrayGeometry::uniform(Point3::ORIGIN, 8, 8, l / 2.0).unwrap();
    let p = AreaLocation::Near(Point3::new(0.05, 0.1, 0.02));
    let a = area_equivalent_channel(&p, &ios, l).unwrap();
    let b = area_equivalent_channel(&p.mirrored(), &ios, l).unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        assert!((x.norm() - y.norm()).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entry_magnitudes_follow_inverse_distance(
        x in -1.0f64..1.0, y in 0.05f64..2.0, z in -1.0f64..1.0
    ) {
        let l = lam();
        let ios = ArrayGeometry::uniform(Point3::ORIGIN, 4, 4, l / 2.0).unwrap();
        let bs = ArrayGeometry::uniform(Point3::new(x, y, z), 2, 2, l).unwrap();
        let h = bs_ios_channel(&bs, &ios, l).unwrap();
        for (r, e) in ios.element_positions().into_iter().enumerate() {
            for (c, b) in bs.element_positions().into_iter().enumerate() {
                prop_assert!((h[(r, c)].norm() - path_amplitude(e.distance(b))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spherical_model_converges_beyond_fifty_rayleigh(
        theta in -1.2f64..1.2, psi in -1.3f64..1.3, k in 50.0f64..400.0
    ) {
        let l = lam();
        let ios = ArrayGeometry::uniform(Point3::ORIGIN, 8, 8, l / 2.0).unwrap();
        let r = rayleigh_distance(ios.aperture_diagonal(), l).unwrap();
        let dir = Direction::new(theta, psi);
        let area = AreaLocation::Far { direction: dir, distance: k * r };
        let far = area_equivalent_channel(&area, &ios, l).unwrap();
        let near = near_field_user_channel(
            &ArrayGeometry::uniform(area.point(&ios), 1, 1, l).unwrap(), &ios, l).unwrap();
        let far = CMatrix::from_row_slice(1, far.len(), far.as_slice());
        let (ph, mag) = model_gap(&near, &far);
        prop_assert!(ph < 0.05, "phase gap {}", ph);
        prop_assert!(mag < 0.01);
    }
}
