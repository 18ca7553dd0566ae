use omnisurf_channel::{bs_ios_channel, user_channel, CMatrix, CVector};
use omnisurf_codebook::{user_combiner_codebook, GridSpec};
use omnisurf_geometry::{rayleigh_distance, wavelength, ArrayGeometry, FieldRegion, Point3, Side};
use omnisurf_surface::AmplitudeSplit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ArrayConfig, DropConfig, RegionSpec, ScenarioConfig, SideSpec};
use crate::HarnessError;

/// Fixed part of a scenario: arrays, BS-to-surface channel and constants.
#[derive(Debug, Clone)]
pub struct Scene {
    pub lambda: f64,
    pub ios: ArrayGeometry,
    pub bs: ArrayGeometry,
    pub h_bi: CMatrix,
    pub rayleigh: f64,
    pub split: AmplitudeSplit,
    pub coupling: f64,
    pub combiners: Vec<CVector>,
    user_dims: (usize, usize, f64),
}

fn array(cfg: &ArrayConfig, lambda: f64) -> Result<ArrayGeometry, HarnessError> {
    let [x, y, z] = cfg.position;
    ArrayGeometry::uniform(Point3::new(x, y, z), cfg.horizontal, cfg.vertical, cfg.spacing * lambda)
        .map_err(|e| HarnessError::Config(e.to_string()))
}

impl Scene {
    pub fn new(cfg: &ScenarioConfig) -> Result<Scene, HarnessError> {
        let lambda = wavelength(cfg.frequency_hz).map_err(|e| HarnessError::Config(e.to_string()))?;
        let ios = array(&cfg.ios, lambda)?;
        let bs = array(&cfg.bs, lambda)?;
        let h_bi = bs_ios_channel(&bs, &ios, lambda)?;
        let rayleigh = rayleigh_distance(ios.aperture_diagonal(), lambda)?;
        let u = &cfg.users;
        let combiners = user_combiner_codebook(u.horizontal * u.vertical, cfg.training.combiners)?;
        Ok(Scene {
            lambda,
            ios,
            bs,
            h_bi,
            rayleigh,
            split: AmplitudeSplit::Uniform(cfg.surface.gamma_t),
            coupling: cfg.surface.coupling,
            combiners,
            user_dims: (u.horizontal, u.vertical, u.spacing * lambda),
        })
    }

    pub fn gamma_t(&self) -> f64 {
        match self.split {
            AmplitudeSplit::Uniform(g) => g,
            AmplitudeSplit::PerElement(ref v) => v[0],
        }
    }

    pub fn gamma_r(&self) -> f64 {
        (1.0 - self.gamma_t().powi(2)).sqrt()
    }

    /// Grid with rings given in Rayleigh distances.
    pub fn grid_spec(&self, areas: usize, rings: &[f64]) -> GridSpec {
        GridSpec { areas, rings: rings.iter().map(|r| r * self.rayleigh).collect() }
    }

    /// User array centred at `p` with its channel from the surface.
    pub fn user_at(&self, p: Point3) -> Result<SceneUser, HarnessError> {
        let (h, v, d) = self.user_dims;
        let arr = ArrayGeometry::uniform(p, h, v, d).map_err(|e| HarnessError::Config(e.to_string()))?;
        let side = Side::of(p - self.ios.origin).map_err(|e| HarnessError::Config(e.to_string()))?;
        let ch = user_channel(&arr, &self.ios, self.lambda)?;
        Ok(SceneUser { position: p, side, model: ch.model, channel: ch.matrix })
    }
}

#[derive(Debug, Clone)]
pub struct SceneUser {
    pub position: Point3,
    pub side: Side,
    pub model: FieldRegion,
    /// `N_u x L`.
    pub channel: CMatrix,
}

/// Where to place one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub position: Point3,
    pub side: Side,
    pub region: RegionSpec,
}

/// Samples one user: radius uniform in the region's annulus; `sin(azimuth)`
/// uniform within `spread` cell half-widths of a uniformly chosen cell centre.
pub fn sample_user<R: Rng + ?Sized>(
    spec: &DropConfig,
    cells: usize,
    rayleigh: f64,
    origin: Point3,
    side: Side,
    region: RegionSpec,
    rng: &mut R,
) -> Result<Placement, HarnessError> {
    let [lo, hi] = match region {
        RegionSpec::Near => spec.near,
        RegionSpec::Far => spec.far,
    };
    if !(lo > 0.0 && lo < hi) || cells == 0 {
        return Err(HarnessError::Config(format!("empty drop region [{lo}, {hi}]")));
    }
    let r = rng.random_range(lo..hi) * rayleigh;
    let n = cells as f64;
    let i = rng.random_range(0..cells) as f64;
    let jitter = rng.random_range(-1.0..1.0) * spec.spread / n;
    let sa = (-1.0 + (2.0 * i + 1.0) / n + jitter).clamp(-spec.max_sin, spec.max_sin);
    let sign = if side == Side::Reflective { 1.0 } else { -1.0 };
    let position = origin + Point3::new(r * sa, sign * r * (1.0 - sa * sa).sqrt(), 0.0);
    Ok(Placement { position, side, region })
}

pub fn side_of(s: SideSpec) -> Side {
    match s {
        SideSpec::Reflective => Side::Reflective,
        SideSpec::Refractive => Side::Refractive,
    }
}

/// Users of drop `seed`, in configuration order. Deterministic in `seed`.
pub fn drop_users(cfg: &ScenarioConfig, scene: &Scene, seed: u64) -> Result<Vec<Placement>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = cfg.codebook.areas / (2 * cfg.codebook.rings.len());
    cfg.users
        .sides
        .iter()
        .zip(&cfg.users.regions)
        .map(|(&s, &r)| sample_user(&cfg.drop, cells, scene.rayleigh, scene.ios.origin, side_of(s), r, &mut rng))
        .collect()
}
