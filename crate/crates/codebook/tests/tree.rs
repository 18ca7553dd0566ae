use std::f64::consts::PI;

use num_complex::Complex64;
use omnisurf_channel::AreaLocation;
use omnisurf_codebook::*;
use omnisurf_geometry::{rayleigh_distance, wavelength, ArrayGeometry, Point3};

fn cov(ix: &[usize]) -> Coverage {
    ix.iter().copied().collect()
}

fn lam() -> f64 {
    wavelength(26e9).unwrap()
}

fn grid(p: usize) -> AreaGrid {
    let s = ArrayGeometry::uniform(Point3::ORIGIN, 8, 8, lam() / 2.0).unwrap();
    let r = rayleigh_distance(s.aperture_diagonal(), lam()).unwrap();
    build_area_grid(&GridSpec { areas: p, rings: vec![0.25 * r, 2.0 * r] }, &s, lam()).unwrap()
}

#[test]
fn smallest_tree() {
    let s = ArrayGeometry::uniform(Point3::ORIGIN, 2, 2, lam() / 2.0).unwrap();
    let g = AreaGrid::from_reflective(
        &[AreaLocation::Near(Point3::new(-0.05, 0.05, 0.0)), AreaLocation::Near(Point3::new(0.05, 0.05, 0.0))],
        &s,
        lam(),
    )
    .unwrap();
    let cb = build_hierarchical_codebook(&g, 1.0).unwrap();
    assert_eq!(cb.depth, 1);
    assert!(cb.layers.is_empty());
    assert_eq!(cb.leaf(1).coverage, cov(&[1]));
    assert_eq!(cb.leaf(2).coverage, cov(&[2]));
    assert_eq!(layer_coverage(2, 1, 1), cov(&[1]));
    assert_eq!(layer_coverage(2, 1, 2), cov(&[2]));
}

#[test]
fn interleaving_pattern() {
    assert_eq!(layer_coverage(8, 1, 1), cov(&[1, 2, 3, 4]));
    assert_eq!(layer_coverage(8, 2, 1), cov(&[1, 2, 5, 6]));
    assert_eq!(layer_coverage(8, 2, 2), cov(&[3, 4, 7, 8]));
    assert_eq!(layer_coverage(8, 3, 1), cov(&[1, 3, 5, 7]));
}

#[test]
fn layers_partition_leaves() {
    for n in [2usize, 4, 8, 16, 32] {
        let depth = n.trailing_zeros() as usize;
        for s in 1..=depth {
            let a = layer_coverage(n, s, 1);
            let b = layer_coverage(n, s, 2);
            assert_eq!(a.len(), b.len());
            assert!(a.is_disjoint(&b));
            assert_eq!(a.union(&b).count(), n);
        }
    }
}

#[test]
fn root_to_leaf_paths_are_unique() {
    let n = 16;
    let depth = 4;
    for leaf in 1..=n {
        let mut beta = 1usize;
        for s in 1..depth {
            let tau = if layer_coverage(n, s, 1).contains(&leaf) { 1 } else { 2 };
            beta = 2 * beta + tau - 2;
        }
        assert!(leaf == 2 * beta - 1 || leaf == 2 * beta, "leaf {leaf} beta {beta}");
    }
}

#[test]
fn desk_codebook_shape_and_export() {
    let g = grid(32);
    let cb = build_hierarchical_codebook(&g, 1.0).unwrap();
    assert_eq!(cb.depth, 4);
    assert_eq!(cb.layers.len(), 3);
    assert_eq!(cb.leaf_count(), 16);
    assert_eq!(cb.layer(2)[0].coverage, layer_coverage(16, 2, 1));
    let rows = cb.export_rows();
    assert_eq!(rows.len(), 6 + 16);
    assert_eq!(rows[0].path, "1.1");
    assert_eq!(rows[6].path, "4.1");
    assert_eq!(rows[21].q.len(), 64);
    let union: Coverage = cb.leaves.iter().flat_map(|c| c.coverage.iter().copied()).collect();
    assert_eq!(union, (1..=16).collect());
}

#[test]
fn rejects_non_power_of_two() {
    let s = ArrayGeometry::uniform(Point3::ORIGIN, 2, 2, lam() / 2.0).unwrap();
    let locs: Vec<_> = (0..3).map(|i| AreaLocation::Near(Point3::new(0.01 * i as f64, 0.1, 0.0))).collect();
    let g = AreaGrid::from_reflective(&locs, &s, lam()).unwrap();
    assert!(matches!(build_hierarchical_codebook(&g, 1.0), Err(CodebookError::NotPowerOfTwo(6))));
}

#[test]
fn combiner_single_beam_is_broadside() {
    let w = user_combiner_codebook(4, 1).unwrap();
    assert_eq!(w.len(), 1);
    for x in w[0].iter() {
        assert!((x - Complex64::from(0.5)).norm() < 1e-15);
    }
}

#[test]
fn combiner_orthogonality() {
    let w = user_combiner_codebook(4, 4).unwrap();
    for (i, a) in w.iter().enumerate() {
        assert!((a.norm() - 1.0).abs() < 1e-14);
        for (j, b) in w.iter().enumerate() {
            // |sum_n exp(j pi n (s_i - s_j))| / N with s_i - s_j = (i - j)/2
            let d = PI * (i as f64 - j as f64) / 2.0;
            let oracle: Complex64 = (0..4).map(|n| Complex64::from_polar(0.25, d * n as f64)).sum();
            let ip = a.dotc(b);
            assert!((ip.norm() - oracle.norm()).abs() < 1e-12);
            if i != j {
                assert!(ip.norm() < 1e-12);
            }
        }
    }
    assert!(user_combiner_codebook(0, 4).is_err());
    assert!(user_combiner_codebook(4, 0).is_err());
}
