//! Beam gain over a horizontal slice through the surface.

use omnisurf_channel::{spherical_coefficient, CVector};
use omnisurf_geometry::{ArrayGeometry, Point3, Side};
use omnisurf_training::Beam;

use crate::config::GainMapConfig;
use crate::schemes::Environment;
use crate::HarnessError;

/// Sampling grid in the x-y plane at height `z` relative to the surface
/// centre. The y samples are cell centres, mirrored about the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub z: f64,
}

impl SliceGrid {
    pub fn new(half_width: f64, depth: f64, nx: usize, ny: usize, z: f64) -> Result<Self, HarnessError> {
        if nx == 0 || ny < 2 || ny % 2 != 0 || !(half_width > 0.0) || !(depth > 0.0) {
            return Err(HarnessError::Config("gain map needs nx >= 1, an even ny >= 2 and a positive extent".into()));
        }
        let xs = if nx == 1 {
            vec![0.0]
        } else {
            (0..nx).map(|i| -half_width + 2.0 * half_width * i as f64 / (nx - 1) as f64).collect()
        };
        let half = ny / 2;
        let step = depth / half as f64;
        let pos: Vec<f64> = (0..half).map(|j| (j as f64 + 0.5) * step).collect();
        let ys = pos.iter().rev().map(|y| -y).chain(pos.iter().copied()).collect();
        Ok(SliceGrid { xs, ys, z })
    }

    pub fn from_config(cfg: &GainMapConfig) -> Result<Self, HarnessError> {
        Self::new(cfg.half_width, cfg.depth, cfg.nx, cfg.ny, 0.0)
    }

    /// Index of the sample mirrored across the surface.
    pub fn mirror_row(&self, j: usize) -> usize {
        self.ys.len() - 1 - j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MirrorCheck {
    /// `(column, row)` of the strongest sample on each side.
    pub reflective_peak: (usize, usize),
    pub refractive_peak: (usize, usize),
    /// Peaks mirror each other to within one grid cell.
    pub peaks_mirrored: bool,
    /// Gain at the reflective peak over the gain at its mirror image.
    pub ratio: f64,
    pub expected_ratio: f64,
}

impl MirrorCheck {
    pub fn ratio_error(&self) -> f64 {
        (self.ratio - self.expected_ratio).abs() / self.expected_ratio
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainMap {
    pub grid: SliceGrid,
    /// `gain[row][column]`, rows follow `grid.ys`.
    pub gain: Vec<Vec<f64>>,
    pub check: MirrorCheck,
}

impl GainMap {
    /// `(x, y, gain)` samples, row by row.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.grid
            .ys
            .iter()
            .zip(&self.gain)
            .flat_map(move |(&y, row)| self.grid.xs.iter().zip(row).map(move |(&x, &g)| (x, y, g)))
    }
}

fn beam_gain_at(ios: &ArrayGeometry, field: &CVector, p: Point3, lambda: f64) -> f64 {
    ios.element_positions()
        .iter()
        .zip(field.iter())
        .map(|(e, f)| spherical_coefficient(e.distance(p), lambda) * f)
        .sum::<num_complex::Complex64>()
        .norm()
}

fn argmax(gain: &[Vec<f64>], rows: impl Iterator<Item = usize>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut top = f64::NEG_INFINITY;
    for j in rows {
        for (i, &g) in gain[j].iter().enumerate() {
            if g > top {
                top = g;
                best = (i, j);
            }
        }
    }
    best
}

/// Single-antenna gain of `beam` at every grid sample, plus the check that
/// the two sides mirror each other with amplitude ratio `gamma_t / gamma_r`.
pub fn beam_gain_map(
    beam: &Beam,
    ios: &ArrayGeometry,
    lambda: f64,
    gammas: (f64, f64),
    grid: &SliceGrid,
) -> Result<GainMap, HarnessError> {
    if beam.reflective.len() != ios.element_count() {
        return Err(HarnessError::Config(format!(
            "beam has {} entries for a {}-element surface",
            beam.reflective.len(),
            ios.element_count()
        )));
    }
    let o = ios.origin;
    let gain: Vec<Vec<f64>> = grid
        .ys
        .iter()
        .map(|&y| {
            let field = if y > 0.0 { beam.toward(Side::Reflective) } else { beam.toward(Side::Refractive) };
            grid.xs.iter().map(|&x| beam_gain_at(ios, field, o + Point3::new(x, y, grid.z), lambda)).collect()
        })
        .collect();
    if gain.iter().flatten().any(|g| !g.is_finite()) {
        return Err(HarnessError::Numerical("gain map has non-finite samples".into()));
    }
    let half = grid.ys.len() / 2;
    let refl = argmax(&gain, half..grid.ys.len());
    let refr = argmax(&gain, 0..half);
    let mirrored_row = grid.mirror_row(refl.1);
    let peaks_mirrored = refl.0.abs_diff(refr.0) <= 1 && mirrored_row.abs_diff(refr.1) <= 1;
    let ratio = gain[refl.1][refl.0] / gain[mirrored_row][refl.0];
    Ok(GainMap {
        grid: grid.clone(),
        gain,
        check: MirrorCheck {
            reflective_peak: refl,
            refractive_peak: refr,
            peaks_mirrored,
            ratio,
            expected_ratio: gammas.0 / gammas.1,
        },
    })
}

/// Gain map of the configured leaf of the proposed codebook.
pub fn proposed_gain_map(env: &Environment) -> Result<GainMap, HarnessError> {
    let cb = &env.config.codebook;
    let tree = env.tree(cb.areas, &cb.rings)?;
    let leaf = env.config.gainmap.leaf;
    if leaf == 0 || leaf > tree.leaf_count() {
        return Err(HarnessError::Config(format!(
            "gainmap.leaf must lie in 1..={} (got {leaf})",
            tree.leaf_count()
        )));
    }
    let s = &env.scene;
    beam_gain_map(
        tree.leaf(leaf),
        &s.ios,
        s.lambda,
        (s.gamma_t(), s.gamma_r()),
        &SliceGrid::from_config(&env.config.gainmap)?,
    )
}
