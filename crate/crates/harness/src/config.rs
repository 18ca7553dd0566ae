//! Scenario configuration (TOML).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Environment variable that overrides `output.dir`.
pub const OUT_DIR_ENV: &str = "OMNISURF_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Base seed; drop `i` uses `seed + i`.
    pub seed: u64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub ios: ArrayConfig,
    #[serde(default = "ArrayConfig::bs_default")]
    pub bs: ArrayConfig,
    #[serde(default)]
    pub users: UsersConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub codebook: CodebookConfig,
    #[serde(default)]
    pub drop: DropConfig,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub beamforming: BeamformingSection,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub gainmap: GainMapConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Planar array; spacings are in wavelengths, position in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub horizontal: usize,
    pub vertical: usize,
    pub spacing: f64,
    #[serde(default)]
    pub position: [f64; 3],
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig { horizontal: 8, vertical: 8, spacing: 0.5, position: [0.0; 3] }
    }
}

impl ArrayConfig {
    fn bs_default() -> Self {
        ArrayConfig { horizontal: 4, vertical: 2, spacing: 1.0, position: [0.0, 0.1, 0.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideSpec {
    Reflective,
    Refractive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionSpec {
    Near,
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsersConfig {
    pub horizontal: usize,
    pub vertical: usize,
    pub spacing: f64,
    /// One entry per user.
    pub sides: Vec<SideSpec>,
    /// One entry per user.
    pub regions: Vec<RegionSpec>,
}

impl Default for UsersConfig {
    fn default() -> Self {
        use RegionSpec::*;
        use SideSpec::*;
        UsersConfig {
            horizontal: 2,
            vertical: 1,
            spacing: 0.5,
            sides: vec![Reflective, Reflective, Refractive, Refractive],
            regions: vec![Near, Far, Near, Far],
        }
    }
}

impl UsersConfig {
    pub fn count(&self) -> usize {
        self.sides.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// Phase offset between reflection and refraction, radians.
    pub coupling: f64,
    /// Reflective amplitude of every element.
    pub gamma_t: f64,
    /// Final phase projection onto `2^bits` levels; absent means continuous.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_bits: Option<u32>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig { coupling: PI / 2.0, gamma_t: FRAC_1_SQRT_2, phase_bits: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookConfig {
    /// Total areas `P` over both sides.
    pub areas: usize,
    /// Ring distances in Rayleigh distances.
    pub rings: Vec<f64>,
    pub gain: f64,
    /// Ring of the near-field-only baseline codebook.
    pub near_ring: f64,
    /// Ring of the far-field-only baseline codebook.
    pub far_ring: f64,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        CodebookConfig { areas: 32, rings: vec![0.25, 2.0], gain: 1.0, near_ring: 0.25, far_ring: 2.0 }
    }
}

/// User sampling: radius uniform in an annulus (in Rayleigh distances),
/// azimuth near a randomly chosen grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropConfig {
    pub near: [f64; 2],
    pub far: [f64; 2],
    /// Azimuth jitter around the cell centre, as a fraction of the cell half-width.
    pub spread: f64,
    /// Largest allowed `|sin(azimuth)|`.
    pub max_sin: f64,
}

impl Default for DropConfig {
    fn default() -> Self {
        DropConfig { near: [0.2, 0.3], far: [1.5, 2.5], spread: 0.5, max_sin: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub combiners: usize,
    pub noisy: bool,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection { combiners: 4, noisy: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamformingSection {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BeamformingSection {
    fn default() -> Self {
        BeamformingSection { tolerance: 1e-8, max_iterations: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seeds: usize,
    pub snr_db: Vec<f64>,
    pub noise_variance: f64,
    pub frame_slots: usize,
    pub schemes: Vec<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seeds: 30,
            snr_db: vec![0.0, 10.0, 20.0],
            noise_variance: 1.0,
            frame_slots: 1000,
            schemes: crate::schemes::SCHEME_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Sampling grid of the beam-gain map in the `z = 0` plane, metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainMapConfig {
    /// Leaf of the proposed codebook to radiate.
    pub leaf: usize,
    pub half_width: f64,
    pub depth: f64,
    pub nx: usize,
    /// Samples per side of the surface.
    pub ny: usize,
}

impl Default for GainMapConfig {
    fn default() -> Self {
        GainMapConfig { leaf: 6, half_width: 0.4, depth: 0.4, nx: 81, ny: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::desk()
    }
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ScenarioConfig {
    /// Desk-scale scene: 8x8 surface at 26 GHz, four two-antenna users.
    pub fn desk() -> Self {
        ScenarioConfig {
            seed: 1,
            frequency_hz: 26e9,
            ios: ArrayConfig::default(),
            bs: ArrayConfig::bs_default(),
            users: UsersConfig::default(),
            surface: SurfaceConfig::default(),
            codebook: CodebookConfig::default(),
            drop: DropConfig::default(),
            training: TrainingSection::default(),
            beamforming: BeamformingSection::default(),
            sweep: SweepConfig::default(),
            gainmap: GainMapConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Output directory, honouring [`OUT_DIR_ENV`].
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let pos = |x: f64, what: &str| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{what} must be positive (got {x})")))
            }
        };
        pos(self.frequency_hz, "frequency_hz")?;
        for (name, a) in [("ios", &self.ios), ("bs", &self.bs)] {
            if a.horizontal == 0 || a.vertical == 0 {
                return Err(invalid(format!("{name} needs at least one element per axis")));
            }
            pos(a.spacing, &format!("{name}.spacing"))?;
            if a.position.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("{name}.position must be finite")));
            }
        }
        if self.bs.position[1] <= self.ios.position[1] {
            return Err(invalid("the base station must be on the reflective side (y above the surface)"));
        }
        let u = &self.users;
        if u.horizontal == 0 || u.vertical == 0 {
            return Err(invalid("users need at least one antenna"));
        }
        pos(u.spacing, "users.spacing")?;
        if u.sides.is_empty() {
            return Err(invalid("at least one user is required"));
        }
        if u.sides.len() != u.regions.len() {
            return Err(invalid("users.sides and users.regions must have the same length"));
        }
        let s = &self.surface;
        if !s.coupling.is_finite() {
            return Err(invalid("surface.coupling must be finite"));
        }
        if !(s.gamma_t > 0.0 && s.gamma_t < 1.0) {
            return Err(invalid(format!("surface.gamma_t must lie in (0, 1) (got {})", s.gamma_t)));
        }
        if s.phase_bits == Some(0) {
            return Err(invalid("surface.phase_bits must be at least 1"));
        }
        let c = &self.codebook;
        if c.areas < 4 || !c.areas.is_power_of_two() {
            return Err(invalid(format!("codebook.areas must be a power of two >= 4 (got {})", c.areas)));
        }
        if c.areas > self.ios.horizontal * self.ios.vertical {
            return Err(invalid("codebook.areas cannot exceed the number of surface elements"));
        }
        if c.rings.is_empty() || (c.areas / 2) % c.rings.len() != 0 {
            return Err(invalid("codebook.rings must divide the reflective areas evenly"));
        }
        for &r in c.rings.iter().chain([&c.near_ring, &c.far_ring]) {
            pos(r, "codebook ring")?;
        }
        pos(c.gain, "codebook.gain")?;
        if self.sweep.schemes.iter().any(|s| s == "dual-equal-overhead") && (c.areas / 4) % c.rings.len() != 0 {
            return Err(invalid("dual-equal-overhead needs codebook.areas / 4 to divide evenly over the rings"));
        }
        let d = &self.drop;
        for (name, [lo, hi]) in [("drop.near", d.near), ("drop.far", d.far)] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
                return Err(invalid(format!("{name} must be an interval 0 < lo < hi")));
            }
        }
        if !(d.spread >= 0.0 && d.spread <= 1.0) {
            return Err(invalid("drop.spread must lie in [0, 1]"));
        }
        if !(d.max_sin > 0.0 && d.max_sin < 1.0) {
            return Err(invalid("drop.max_sin must lie in (0, 1)"));
        }
        if self.training.combiners == 0 {
            return Err(invalid("training.combiners must be at least 1"));
        }
        pos(self.beamforming.tolerance, "beamforming.tolerance")?;
        if self.beamforming.max_iterations == 0 {
            return Err(invalid("beamforming.max_iterations must be at least 1"));
        }
        let w = &self.sweep;
        if w.snr_db.is_empty() || w.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(invalid("sweep.snr_db must be a non-empty list of finite values"));
        }
        pos(w.noise_variance, "sweep.noise_variance")?;
        if w.frame_slots == 0 {
            return Err(invalid("sweep.frame_slots must be positive"));
        }
        for name in &w.schemes {
            if !crate::schemes::SCHEME_NAMES.contains(&name.as_str()) {
                return Err(invalid(format!(
                    "unknown scheme '{name}' (known: {})",
                    crate::schemes::SCHEME_NAMES.join(", ")
                )));
            }
        }
        let g = &self.gainmap;
        if g.nx == 0 || g.ny == 0 {
            return Err(invalid("gainmap needs at least one sample per axis"));
        }
        pos(g.half_width, "gainmap.half_width")?;
        pos(g.depth, "gainmap.depth")?;
        if g.leaf == 0 || g.leaf > c.areas / 2 {
            return Err(invalid(format!("gainmap.leaf must lie in 1..={}", c.areas / 2)));
        }
        Ok(())
    }
}
