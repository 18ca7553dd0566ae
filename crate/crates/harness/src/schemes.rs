//! Beam-management schemes compared by the sweep.

use num_complex::Complex64;
use omnisurf_beamforming::{
    allocate_power, alternating_factorization, effective_channel, sum_rate, FactorizationConfig, UserLink,
};
use omnisurf_channel::CVector;
use omnisurf_codebook::{build_area_grid, build_hierarchical_codebook};
use omnisurf_geometry::Side;
use omnisurf_training::{
    run_training, run_training_per_side, BeamTree, TrainingConfig, TrainingReport, TrainingUser,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::scene::{Scene, SceneUser};
use crate::HarnessError;

pub const SCHEME_NAMES: [&str; 6] =
    ["perfect", "proposed", "near-only", "far-only", "dual-equal-resolution", "dual-equal-overhead"];

const DROP_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Seeded generator on one of the per-drop streams.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn drop_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, DROP_STREAM)
}

/// Configuration plus the scene built from it.
#[derive(Debug, Clone)]
pub struct Environment {
    pub config: ScenarioConfig,
    pub scene: Scene,
}

impl Environment {
    pub fn new(config: ScenarioConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let scene = Scene::new(&config)?;
        Ok(Environment { config, scene })
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            noise_variance: self.config.sweep.noise_variance,
            include_noise: self.config.training.noisy,
            combiner_count: self.config.training.combiners,
        }
    }

    /// Realized tree of a hierarchical codebook over the given rings
    /// (in Rayleigh distances).
    pub fn tree(&self, areas: usize, rings: &[f64]) -> Result<BeamTree, HarnessError> {
        let s = &self.scene;
        let grid = build_area_grid(&s.grid_spec(areas, rings), &s.ios, s.lambda)?;
        let cb = build_hierarchical_codebook(&grid, self.config.codebook.gain)?;
        Ok(BeamTree::realize(&cb, &s.h_bi, &s.split, s.coupling)?)
    }

    /// Sum rate at every configured SNR for the given targets and receivers.
    pub fn rates(&self, targets: &[CVector], links: &[UserLink], seed: u64) -> Result<Vec<f64>, HarnessError> {
        let s = &self.scene;
        let fc = FactorizationConfig {
            split: s.split.clone(),
            c: s.coupling,
            tolerance: self.config.beamforming.tolerance,
            max_iterations: self.config.beamforming.max_iterations,
        };
        let sol = alternating_factorization(targets, &s.h_bi, &fc, &mut stream_rng(seed, INIT_STREAM))?;
        let surface = match self.config.surface.phase_bits {
            Some(b) => sol.surface.quantized(b)?,
            None => sol.surface,
        };
        let eff = effective_channel(links, &surface, &s.h_bi, &sol.precoders)?;
        let noise = self.config.sweep.noise_variance;
        self.config
            .sweep
            .snr_db
            .iter()
            .map(|snr| {
                let budget = 10f64.powf(snr / 10.0) * noise;
                let p = allocate_power(&eff.gains, noise, budget)?;
                Ok(sum_rate(&eff.matrix, &p, noise))
            })
            .collect()
    }
}

/// One drop: seed and users.
#[derive(Debug, Clone)]
pub struct DropInstance {
    pub seed: u64,
    pub users: Vec<SceneUser>,
}

impl DropInstance {
    pub fn training_users(&self) -> Vec<TrainingUser> {
        self.users.iter().map(|u| TrainingUser { channel: u.channel.clone(), side: u.side }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    /// One entry per configured SNR.
    pub sum_rates: Vec<f64>,
    pub train_slots: usize,
    /// Broadcast slots above the bottom layer.
    pub upper_slots: usize,
    pub leaves: Vec<usize>,
}

pub trait Scheme: Send + Sync {
    fn name(&self) -> &str;
    fn run(&self, env: &Environment, drop: &DropInstance) -> Result<SchemeOutcome, HarnessError>;
}

enum Plan {
    Shared(BeamTree),
    PerSide(BeamTree, BeamTree),
}

/// Codebook-trained scheme: train, then design on the trained beams.
pub struct Trained {
    name: String,
    plan: Plan,
}

impl Trained {
    pub fn shared(name: &str, tree: BeamTree) -> Self {
        Trained { name: name.into(), plan: Plan::Shared(tree) }
    }

    pub fn per_side(name: &str, reflective: BeamTree, refractive: BeamTree) -> Self {
        Trained { name: name.into(), plan: Plan::PerSide(reflective, refractive) }
    }

    pub fn train(&self, env: &Environment, drop: &DropInstance) -> Result<TrainingReport, HarnessError> {
        let users = drop.training_users();
        let cfg = env.training_config();
        let mut rng = stream_rng(drop.seed, NOISE_STREAM);
        let w = &env.scene.combiners;
        Ok(match &self.plan {
            Plan::Shared(t) => run_training(t, &users, w, &cfg, &mut rng)?,
            Plan::PerSide(a, b) => run_training_per_side(a, b, &users, w, &cfg, &mut rng)?,
        })
    }

    fn leaf_target(&self, leaf: usize, side: Side) -> &CVector {
        match &self.plan {
            Plan::Shared(t) => &t.leaf(leaf).target,
            Plan::PerSide(a, b) => match side {
                Side::Reflective => &a.leaf(leaf).target,
                Side::Refractive => &b.leaf(leaf).target,
            },
        }
    }
}

impl Scheme for Trained {
    fn name(&self) -> &str {
        &self.name
    }

    fn run(&self, env: &Environment, drop: &DropInstance) -> Result<SchemeOutcome, HarnessError> {
        let report = self.train(env, drop)?;
        let mut targets = Vec::with_capacity(drop.users.len());
        let mut links = Vec::with_capacity(drop.users.len());
        for (u, t) in drop.users.iter().zip(&report.users) {
            targets.push(self.leaf_target(t.leaf, u.side).clone());
            links.push(UserLink {
                channel: u.channel.clone(),
                combiner: env.scene.combiners[t.combiner].clone(),
                side: u.side,
            });
        }
        Ok(SchemeOutcome {
            sum_rates: env.rates(&targets, &links, drop.seed)?,
            train_slots: report.total_slots(),
            upper_slots: report.upper_slots,
            leaves: report.users.iter().map(|u| u.leaf).collect(),
        })
    }
}

/// Exact-channel reference: the better, at each SNR, of a matched-filter
/// design on the true channels and the trained proposed design. No
/// training overhead.
pub struct PerfectCsi {
    proposed: Trained,
}

impl PerfectCsi {
    pub fn new(proposed_tree: BeamTree) -> Self {
        PerfectCsi { proposed: Trained::shared("proposed", proposed_tree) }
    }
}

/// Dominant left singular vector `u` of `h` and the matched target
/// `conj(g) / |g|^2` for the row `g = u^H h` as seen through the reflective
/// coefficients.
pub fn matched_target(user: &SceneUser, scene: &Scene) -> (CVector, CVector) {
    let svd = user.channel.clone().svd(true, false);
    let u_mat = svd.u.expect("left singular vectors requested");
    let best = svd
        .singular_values
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if *s > svd.singular_values[b] { i } else { b });
    let w = u_mat.column(best).into_owned();
    let mut g = (user.channel.adjoint() * &w).conjugate();
    if user.side == Side::Refractive {
        g *= Complex64::from_polar(scene.gamma_r() / scene.gamma_t(), -scene.coupling);
    }
    let q = g.conjugate() / Complex64::from(g.norm_squared());
    (q, w)
}

impl Scheme for PerfectCsi {
    fn name(&self) -> &str {
        "perfect"
    }

    fn run(&self, env: &Environment, drop: &DropInstance) -> Result<SchemeOutcome, HarnessError> {
        let trained = self.proposed.run(env, drop)?;
        let (targets, links): (Vec<_>, Vec<_>) = drop
            .users
            .iter()
            .map(|u| {
                let (q, w) = matched_target(u, &env.scene);
                (q, UserLink { channel: u.channel.clone(), combiner: w, side: u.side })
            })
            .unzip();
        let matched = env.rates(&targets, &links, drop.seed)?;
        Ok(SchemeOutcome {
            sum_rates: matched.iter().zip(&trained.sum_rates).map(|(a, b)| a.max(*b)).collect(),
            train_slots: 0,
            upper_slots: 0,
            leaves: trained.leaves,
        })
    }
}

/// Builds the named schemes in the given order.
pub fn build_schemes(env: &Environment, names: &[String]) -> Result<Vec<Box<dyn Scheme>>, HarnessError> {
    let cb = &env.config.codebook;
    let s = &env.scene;
    names
        .iter()
        .map(|name| -> Result<Box<dyn Scheme>, HarnessError> {
            Ok(match name.as_str() {
                "proposed" => Box::new(Trained::shared("proposed", env.tree(cb.areas, &cb.rings)?)),
                "perfect" => Box::new(PerfectCsi::new(env.tree(cb.areas, &cb.rings)?)),
                "near-only" => Box::new(Trained::shared("near-only", env.tree(cb.areas, &[cb.near_ring])?)),
                "far-only" => Box::new(Trained::shared("far-only", env.tree(cb.areas, &[cb.far_ring])?)),
                "dual-equal-resolution" => {
                    let t = env.tree(cb.areas, &cb.rings)?;
                    Box::new(Trained::per_side("dual-equal-resolution", t.clone(), t))
                }
                "dual-equal-overhead" => {
                    let grid = build_area_grid(&s.grid_spec(cb.areas / 2, &cb.rings), &s.ios, s.lambda)?;
                    let t = BeamTree::split_surfaces(&grid, &s.h_bi, &s.split, s.coupling)?;
                    Box::new(Trained::shared("dual-equal-overhead", t))
                }
                other => return Err(HarnessError::Config(format!("unknown scheme '{other}'"))),
            })
        })
        .collect()
}
