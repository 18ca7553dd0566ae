#![allow(dead_code)]

use std::f64::consts::PI;

use omnisurf_channel::{bs_ios_channel, user_channel, CMatrix};
use omnisurf_codebook::{build_area_grid, build_hierarchical_codebook, AreaGrid, GridSpec};
use omnisurf_geometry::{rayleigh_distance, wavelength, ArrayGeometry, Point3, Side};
use omnisurf_surface::AmplitudeSplit;
use omnisurf_training::{BeamTree, TrainingUser};
use rand::Rng;

pub struct Desk {
    pub lambda: f64,
    pub ios: ArrayGeometry,
    pub h_bi: CMatrix,
    pub rayleigh: f64,
    pub grid: AreaGrid,
    pub tree: BeamTree,
}

pub fn desk(areas: usize) -> Desk {
    let lambda = wavelength(26e9).unwrap();
    let ios = ArrayGeometry::uniform(Point3::ORIGIN, 8, 8, lambda / 2.0).unwrap();
    let bs = ArrayGeometry::uniform(Point3::new(0.0, 0.1, 0.0), 4, 2, lambda).unwrap();
    let h_bi = bs_ios_channel(&bs, &ios, lambda).unwrap();
    let rayleigh = rayleigh_distance(ios.aperture_diagonal(), lambda).unwrap();
    let grid = build_area_grid(&GridSpec { areas, rings: vec![0.25 * rayleigh, 2.0 * rayleigh] }, &ios, lambda).unwrap();
    let cb = build_hierarchical_codebook(&grid, 1.0).unwrap();
    let tree = BeamTree::realize(&cb, &h_bi, &AmplitudeSplit::equal(), PI / 2.0).unwrap();
    Desk { lambda, ios, h_bi, rayleigh, grid, tree }
}

impl Desk {
    pub fn user_at(&self, p: Point3) -> TrainingUser {
        let arr = ArrayGeometry::uniform(p, 2, 1, self.lambda / 2.0).unwrap();
        TrainingUser { channel: user_channel(&arr, &self.ios, self.lambda).unwrap().matrix, side: Side::of(p).unwrap() }
    }

    /// User in a near or far annulus, near an area cell centre.
    pub fn drop_user<R: Rng>(&self, rng: &mut R, near: bool, side: Side) -> TrainingUser {
        let (lo, hi) = if near { (0.2, 0.3) } else { (1.5, 2.5) };
        let r = rng.random_range(lo..hi) * self.rayleigh;
        let cells = self.grid.len() / 4;
        let i = rng.random_range(0..cells);
        let sa = (-1.0 + (2 * i + 1) as f64 / cells as f64 + rng.random_range(-0.5..0.5) / cells as f64).clamp(-0.95, 0.95);
        let y = r * (1.0 - sa * sa).sqrt() * if side == Side::Reflective { 1.0 } else { -1.0 };
        self.user_at(Point3::new(r * sa, y, 0.0))
    }
}
