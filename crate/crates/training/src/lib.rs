//! Hierarchical multi-user beam training.
//!
//! Upper layers are broadcast to all users at once; each user reports the
//! stronger of two beams and its region index follows `b_s = 2 b_{s-1} + t_s - 2`
//! from `b_0 = 1`. At the bottom layer users are refined one at a time over
//! the two candidate leaves `{2b - 1, 2b}`, then each user sweeps its
//! combiner codebook with the chosen leaf fixed.

mod beams;

use std::fmt;

use num_complex::Complex64;
use omnisurf_channel::{CMatrix, CVector};
use omnisurf_codebook::CodebookError;
use omnisurf_geometry::Side;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub use beams::{Beam, BeamTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainingError {
    #[error("layer choice must be 1 or 2 (got {0})")]
    BadChoice(u8),
    #[error("region index must be at least 1")]
    BadRegion,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no users to train")]
    NoUsers,
    #[error("combiner codebook is empty")]
    NoCombiners,
    #[error("noise variance must be finite and non-negative (got {0})")]
    BadNoise(f64),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub noise_variance: f64,
    /// Add receiver noise to every measurement.
    pub include_noise: bool,
    /// Size of the user-side combiner sweep.
    pub combiner_count: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig { noise_variance: 1.0, include_noise: false, combiner_count: 4 }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainingError> {
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(TrainingError::BadNoise(self.noise_variance));
        }
        if self.combiner_count == 0 {
            return Err(TrainingError::NoCombiners);
        }
        Ok(())
    }
}

/// A user as seen by the trainer: its channel from the surface and its side.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingUser {
    /// `N_u x L`.
    pub channel: CMatrix,
    pub side: Side,
}

/// Optional receiver noise for [`measure_power`].
pub struct Noise<'a, R: Rng + ?Sized> {
    pub variance: f64,
    pub rng: &'a mut R,
}

/// Received power `|w^H H x|^2`, plus `w^H n` with `n ~ CN(0, s2 I)` when
/// noise is given.
pub fn measure_power<R: Rng + ?Sized>(
    w: &CVector,
    h: &CMatrix,
    x: &CVector,
    noise: Option<Noise<'_, R>>,
) -> Result<f64, TrainingError> {
    if w.len() != h.nrows() || x.len() != h.ncols() {
        return Err(TrainingError::Dimension(format!(
            "combiner {} / channel {}x{} / beam {}",
            w.len(),
            h.nrows(),
            h.ncols(),
            x.len()
        )));
    }
    let mut y = w.dotc(&(h * x));
    if let Some(Noise { variance, rng }) = noise {
        let s = (variance / 2.0).sqrt();
        let n = CVector::from_fn(w.len(), |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(s * re, s * im)
        });
        y += w.dotc(&n);
    }
    Ok(y.norm_sqr())
}

/// Measurement context shared by the protocol steps.
pub struct Trainer<'a, R: Rng + ?Sized> {
    pub config: &'a TrainingConfig,
    pub combiners: &'a [CVector],
    pub rng: &'a mut R,
}

impl<R: Rng + ?Sized> Trainer<'_, R> {
    fn measure(&mut self, w: &CVector, user: &TrainingUser, beam: &Beam) -> Result<f64, TrainingError> {
        let noise = self
            .config
            .include_noise
            .then(|| Noise { variance: self.config.noise_variance, rng: &mut *self.rng });
        measure_power(w, &user.channel, beam.toward(user.side), noise)
    }

    /// Best power over a set of combiners; ties go to the lowest index.
    fn best_over(&mut self, ws: &[CVector], user: &TrainingUser, beam: &Beam) -> Result<(usize, f64), TrainingError> {
        let mut best = (0, f64::NEG_INFINITY);
        for (j, w) in ws.iter().enumerate() {
            let p = self.measure(w, user, beam)?;
            if p > best.1 {
                best = (j, p);
            }
        }
        Ok(best)
    }
}

/// Broadside combiner `1/sqrt(N_u)` used during the beam search.
pub fn broadside_combiner(n_u: usize) -> CVector {
    CVector::from_element(n_u, Complex64::from(1.0 / (n_u as f64).sqrt()))
}

/// One user's outcome for a pair of beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerChoice {
    pub tau: u8,
    pub powers: [f64; 2],
}

/// Every user measures both beams with the best of `combiners`; ties pick
/// beam 1.
pub fn run_layer<R: Rng + ?Sized>(
    beams: &[Beam; 2],
    users: &[TrainingUser],
    combiners: &[CVector],
    config: &TrainingConfig,
    rng: &mut R,
) -> Result<Vec<LayerChoice>, TrainingError> {
    if combiners.is_empty() {
        return Err(TrainingError::NoCombiners);
    }
    let mut t = Trainer { config, combiners, rng };
    users
        .iter()
        .map(|u| {
            let a = t.best_over(combiners, u, &beams[0])?.1;
            let b = t.best_over(combiners, u, &beams[1])?.1;
            Ok(LayerChoice { tau: if b > a { 2 } else { 1 }, powers: [a, b] })
        })
        .collect()
}

pub fn update_region_index(beta_prev: usize, tau: u8) -> Result<usize, TrainingError> {
    if beta_prev == 0 {
        return Err(TrainingError::BadRegion);
    }
    match tau {
        1 | 2 => Ok(2 * beta_prev + tau as usize - 2),
        t => Err(TrainingError::BadChoice(t)),
    }
}

/// Candidate leaves below region `beta`.
pub fn bottom_candidates(beta: usize) -> [usize; 2] {
    [2 * beta - 1, 2 * beta]
}

/// Picks each user's leaf among the two candidates below its region index.
pub fn bottom_layer_refinement<R: Rng + ?Sized>(
    betas: &[usize],
    tree: &BeamTree,
    users: &[TrainingUser],
    combiners: &[CVector],
    config: &TrainingConfig,
    rng: &mut R,
) -> Result<Vec<(usize, LayerChoice)>, TrainingError> {
    if betas.len() != users.len() {
        return Err(TrainingError::Dimension(format!("{} region indices for {} users", betas.len(), users.len())));
    }
    betas
        .iter()
        .zip(users)
        .map(|(&beta, user)| {
            if beta == 0 || 2 * beta > tree.leaf_count() {
                return Err(TrainingError::BadRegion);
            }
            let [a, b] = bottom_candidates(beta);
            let pair = [tree.leaf(a).clone(), tree.leaf(b).clone()];
            let choice = run_layer(&pair, std::slice::from_ref(user), combiners, config, rng)?[0];
            Ok((if choice.tau == 1 { a } else { b }, choice))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserTraining {
    /// `b_1 .. b_S`; the last entry is the selected leaf.
    pub trajectory: Vec<usize>,
    pub choices: Vec<u8>,
    pub layer_powers: Vec<[f64; 2]>,
    pub leaf: usize,
    pub combiner: usize,
    pub sweep_powers: Vec<f64>,
}

impl UserTraining {
    /// Power of the final leaf with the selected combiner.
    pub fn power(&self) -> f64 {
        self.sweep_powers[self.combiner]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub users: Vec<UserTraining>,
    pub upper_slots: usize,
    pub bottom_slots: usize,
    pub sweep_slots: usize,
}

impl TrainingReport {
    pub fn total_slots(&self) -> usize {
        self.upper_slots + self.bottom_slots + self.sweep_slots
    }

    /// Slots excluding the combiner sweep.
    pub fn broadcast_slots(&self) -> usize {
        self.upper_slots + self.bottom_slots
    }
}

impl fmt::Display for TrainingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[String]| v.join(" ");
        for (k, u) in self.users.iter().enumerate() {
            let traj: Vec<String> = u.trajectory.iter().map(|b| b.to_string()).collect();
            let pw: Vec<String> = u.layer_powers.iter().map(|[a, b]| format!("{a:.6e}/{b:.6e}")).collect();
            writeln!(
                f,
                "user={} trajectory=[{}] leaf={} combiner={} layer_powers=[{}] power={:.6e} slots={}",
                k + 1,
                join(&traj),
                u.leaf,
                u.combiner + 1,
                join(&pw),
                u.power(),
                self.total_slots()
            )?;
        }
        write!(
            f,
            "slots upper={} bottom={} sweep={} total={}",
            self.upper_slots,
            self.bottom_slots,
            self.sweep_slots,
            self.total_slots()
        )
    }
}

/// Runs the full protocol on one tree.
pub fn run_training<R: Rng + ?Sized>(
    tree: &BeamTree,
    users: &[TrainingUser],
    combiners: &[CVector],
    config: &TrainingConfig,
    rng: &mut R,
) -> Result<TrainingReport, TrainingError> {
    config.validate()?;
    if users.is_empty() {
        return Err(TrainingError::NoUsers);
    }
    if combiners.is_empty() {
        return Err(TrainingError::NoCombiners);
    }
    let n_u = users[0].channel.nrows();
    if users.iter().any(|u| u.channel.nrows() != n_u) || combiners.iter().any(|w| w.len() != n_u) {
        return Err(TrainingError::Dimension("users and combiners must share one antenna count".into()));
    }
    let search = [broadside_combiner(n_u)];
    let k = users.len();
    let mut betas = vec![1usize; k];
    let mut records: Vec<UserTraining> = (0..k)
        .map(|_| UserTraining {
            trajectory: Vec::new(),
            choices: Vec::new(),
            layer_powers: Vec::new(),
            leaf: 0,
            combiner: 0,
            sweep_powers: Vec::new(),
        })
        .collect();
    for pair in &tree.layers {
        let choices = run_layer(pair, users, &search, config, rng)?;
        for ((beta, rec), ch) in betas.iter_mut().zip(&mut records).zip(choices) {
            *beta = update_region_index(*beta, ch.tau)?;
            rec.trajectory.push(*beta);
            rec.choices.push(ch.tau);
            rec.layer_powers.push(ch.powers);
        }
    }
    let picks = bottom_layer_refinement(&betas, tree, users, &search, config, rng)?;
    let mut t = Trainer { config, combiners, rng };
    for ((rec, user), (leaf, ch)) in records.iter_mut().zip(users).zip(picks) {
        rec.trajectory.push(leaf);
        rec.choices.push(ch.tau);
        rec.layer_powers.push(ch.powers);
        rec.leaf = leaf;
        let beam = tree.leaf(leaf);
        rec.sweep_powers = combiners.iter().map(|w| t.measure(w, user, beam)).collect::<Result<_, _>>()?;
        rec.combiner = argmax(&rec.sweep_powers);
    }
    Ok(TrainingReport {
        users: records,
        upper_slots: tree.upper_slots(),
        bottom_slots: 2 * k,
        sweep_slots: k * combiners.len(),
    })
}

/// Training with one tree per side (two independent surfaces). Both trees
/// are broadcast in full, so upper-layer slots add up.
pub fn run_training_per_side<R: Rng + ?Sized>(
    reflective: &BeamTree,
    refractive: &BeamTree,
    users: &[TrainingUser],
    combiners: &[CVector],
    config: &TrainingConfig,
    rng: &mut R,
) -> Result<TrainingReport, TrainingError> {
    if users.is_empty() {
        return Err(TrainingError::NoUsers);
    }
    let mut out: Vec<Option<UserTraining>> = vec![None; users.len()];
    for (side, tree) in [(Side::Reflective, reflective), (Side::Refractive, refractive)] {
        let idx: Vec<usize> = (0..users.len()).filter(|&k| users[k].side == side).collect();
        if idx.is_empty() {
            continue;
        }
        let subset: Vec<TrainingUser> = idx.iter().map(|&k| users[k].clone()).collect();
        let rep = run_training(tree, &subset, combiners, config, rng)?;
        for (k, u) in idx.into_iter().zip(rep.users) {
            out[k] = Some(u);
        }
    }
    let k = users.len();
    Ok(TrainingReport {
        users: out.into_iter().map(|u| u.expect("every user has a side")).collect(),
        upper_slots: reflective.upper_slots() + refractive.upper_slots(),
        bottom_slots: 2 * k,
        sweep_slots: k * combiners.len(),
    })
}

/// Best leaf by exhaustive measurement with the full combiner sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub leaf: usize,
    pub power: f64,
}

pub fn exhaustive_search_oracle<R: Rng + ?Sized>(
    tree: &BeamTree,
    user: &TrainingUser,
    combiners: &[CVector],
    config: &TrainingConfig,
    rng: &mut R,
) -> Result<OracleResult, TrainingError> {
    if combiners.is_empty() {
        return Err(TrainingError::NoCombiners);
    }
    let mut t = Trainer { config, combiners, rng };
    let mut best = OracleResult { leaf: 0, power: f64::NEG_INFINITY };
    for (i, beam) in tree.leaves.iter().enumerate() {
        let (_, p) = t.best_over(combiners, user, beam)?;
        if p > best.power {
            best = OracleResult { leaf: i + 1, power: p };
        }
    }
    Ok(best)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
