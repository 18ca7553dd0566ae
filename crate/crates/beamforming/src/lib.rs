//! Joint design of the surface phases and the digital precoder.
//!
//! Given per-user target beams `q_k`, the solver alternates between a
//! least-squares precoder for fixed phases and a closed-form per-element
//! phase update for a fixed precoder, decreasing
//! `f = sum_k |q_k - Psi_t H_BI v_k|^2` monotonically. Powers come from
//! water-filling on the effective channel gains.

mod power;
mod rate;

use std::f64::consts::PI;

use num_complex::Complex64;
use omnisurf_channel::{CMatrix, CVector};
use omnisurf_surface::{AmplitudeSplit, PhaseMode, SurfaceConfiguration, SurfaceError};
use rand::Rng;
use thiserror::Error;

pub use power::{allocate_power, water_filling, WaterFilling};
pub use rate::{effective_channel, sum_rate, throughput, EffectiveChannel, UserLink};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamformingError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no targets given")]
    NoTargets,
    #[error("effective BS-to-surface matrix is rank deficient (condition estimate {cond:e})")]
    RankDeficient { cond: f64 },
    #[error("gain list is empty")]
    EmptyGains,
    #[error("channel gains must be positive and finite (got {0})")]
    BadGain(f64),
    #[error("power budget must be positive and finite (got {0})")]
    BadBudget(f64),
    #[error("noise variance must be finite and non-negative (got {0})")]
    BadNoise(f64),
    #[error("training uses {slots} of {frame} slots")]
    FrameTooShort { slots: usize, frame: usize },
    #[error("allocated power {total} exceeds the budget {budget}")]
    OverBudget { total: f64, budget: f64 },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

fn check_targets(targets: &[CVector], h_bi: &CMatrix) -> Result<(), BeamformingError> {
    if targets.is_empty() {
        return Err(BeamformingError::NoTargets);
    }
    if let Some(q) = targets.iter().find(|q| q.len() != h_bi.nrows()) {
        return Err(BeamformingError::Dimension(format!("target length {} vs {} elements", q.len(), h_bi.nrows())));
    }
    Ok(())
}

/// `sum_k |q_k - Psi_t H_BI v_k|^2`.
pub fn residual(
    precoders: &[CVector],
    surface: &SurfaceConfiguration,
    h_bi: &CMatrix,
    targets: &[CVector],
) -> Result<f64, BeamformingError> {
    check_targets(targets, h_bi)?;
    if precoders.len() != targets.len() || surface.len() != h_bi.nrows() {
        return Err(BeamformingError::Dimension("precoder or surface size".into()));
    }
    let psi = surface.psi_t();
    let mut f = 0.0;
    for (v, q) in precoders.iter().zip(targets) {
        if v.len() != h_bi.ncols() {
            return Err(BeamformingError::Dimension(format!("precoder length {} vs {}", v.len(), h_bi.ncols())));
        }
        f += (q - psi.component_mul(&(h_bi * v))).norm_squared();
    }
    Ok(f)
}

/// `b_l = sum_k conj(q_kl) (H_BI v_k)_l`; the residual is `a - 2 Re(sum_l Gamma_l b_l e^{j phi_l})`.
pub fn phase_coefficients(targets: &[CVector], h_bi: &CMatrix, precoders: &[CVector]) -> CVector {
    let mut b = CVector::zeros(h_bi.nrows());
    for (q, v) in targets.iter().zip(precoders) {
        b += q.conjugate().component_mul(&(h_bi * v));
    }
    b
}

/// Per-element maximizer of `Re(b_l e^{j phi})`: `phi = -arg(b_l)`. Elements
/// with `b_l = 0` keep their previous phase.
pub fn optimize_phases(
    targets: &[CVector],
    h_bi: &CMatrix,
    precoders: &[CVector],
    previous: &SurfaceConfiguration,
) -> Result<SurfaceConfiguration, BeamformingError> {
    check_targets(targets, h_bi)?;
    let b = phase_coefficients(targets, h_bi, precoders);
    let phases: Vec<f64> = b
        .iter()
        .zip(previous.phases_t())
        .map(|(bl, old)| if *bl == Complex64::from(0.0) { old } else { -bl.arg() })
        .collect();
    Ok(SurfaceConfiguration::from_phases(&phases, &previous.split(), previous.c, PhaseMode::Continuous)?)
}

const RANK_LIMIT: f64 = 1e12;

/// Least-squares precoders `(A^H A)^{-1} A^H q_k` with `A = Psi_t H_BI`, unnormalized.
pub fn least_squares_precoders(
    surface: &SurfaceConfiguration,
    h_bi: &CMatrix,
    targets: &[CVector],
) -> Result<Vec<CVector>, BeamformingError> {
    check_targets(targets, h_bi)?;
    if surface.len() != h_bi.nrows() {
        return Err(BeamformingError::Dimension(format!("surface {} vs {} rows", surface.len(), h_bi.nrows())));
    }
    let mut a = h_bi.clone();
    for (mut row, p) in a.row_iter_mut().zip(surface.psi_t().iter()) {
        row *= *p;
    }
    let gram = a.adjoint() * &a;
    let sv = gram.singular_values();
    let cond = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
    if !(cond <= RANK_LIMIT) {
        return Err(BeamformingError::RankDeficient { cond });
    }
    let chol = gram.cholesky().ok_or(BeamformingError::RankDeficient { cond })?;
    Ok(targets.iter().map(|q| chol.solve(&(a.adjoint() * q))).collect())
}

fn normalized(v: CVector) -> CVector {
    let n = v.norm();
    if n > 0.0 {
        v / Complex64::from(n)
    } else {
        v
    }
}

/// Unit-norm least-squares precoders.
pub fn digital_precoder(
    surface: &SurfaceConfiguration,
    h_bi: &CMatrix,
    targets: &[CVector],
) -> Result<Vec<CVector>, BeamformingError> {
    Ok(least_squares_precoders(surface, h_bi, targets)?.into_iter().map(normalized).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationConfig {
    pub split: AmplitudeSplit,
    pub c: f64,
    /// Stop once the relative residual change is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        FactorizationConfig { split: AmplitudeSplit::equal(), c: PI / 2.0, tolerance: 1e-8, max_iterations: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSolution {
    pub surface: SurfaceConfiguration,
    /// Unit-norm precoder columns, one per user.
    pub precoders: Vec<CVector>,
    /// Transmit power per user; empty until [`BeamformerSolution::set_powers`].
    pub powers: Vec<f64>,
    /// Residual after each outer iteration.
    pub residual_trace: Vec<f64>,
    pub converged: bool,
    /// Constant part of the residual at the final iterate.
    pub a: f64,
    /// Phase coefficients at the final iterate.
    pub b: CVector,
}

impl BeamformerSolution {
    pub fn final_residual(&self) -> f64 {
        self.residual_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn set_powers(&mut self, powers: Vec<f64>, budget: f64) -> Result<(), BeamformingError> {
        let total: f64 = powers.iter().sum();
        if powers.len() != self.precoders.len() {
            return Err(BeamformingError::Dimension(format!("{} powers for {} users", powers.len(), self.precoders.len())));
        }
        if total > budget + 1e-9 || powers.iter().any(|p| !(*p >= 0.0)) {
            return Err(BeamformingError::OverBudget { total, budget });
        }
        self.powers = powers;
        Ok(())
    }
}

/// Alternates precoder and phase updates from random initial phases.
pub fn alternating_factorization<R: Rng + ?Sized>(
    targets: &[CVector],
    h_bi: &CMatrix,
    config: &FactorizationConfig,
    rng: &mut R,
) -> Result<BeamformerSolution, BeamformingError> {
    check_targets(targets, h_bi)?;
    let init: Vec<f64> = (0..h_bi.nrows()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let mut surface = SurfaceConfiguration::from_phases(&init, &config.split, config.c, PhaseMode::Continuous)?;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut v = Vec::new();
    for _ in 0..config.max_iterations.max(1) {
        v = least_squares_precoders(&surface, h_bi, targets)?;
        surface = optimize_phases(targets, h_bi, &v, &surface)?;
        let f = residual(&v, &surface, h_bi, targets)?;
        let done = trace.last().is_some_and(|&prev: &f64| (prev - f).abs() <= config.tolerance * prev.max(f64::MIN_POSITIVE))
            || f == 0.0;
        trace.push(f);
        if done {
            converged = true;
            break;
        }
    }
    let b = phase_coefficients(targets, h_bi, &v);
    let gam = surface.split();
    let a = targets
        .iter()
        .zip(&v)
        .map(|(q, vk)| {
            let hv = h_bi * vk;
            q.norm_squared()
                + hv.iter().enumerate().map(|(l, x)| x.norm_sqr() * gamma_sq(&gam, l)).sum::<f64>()
        })
        .sum();
    Ok(BeamformerSolution {
        surface,
        precoders: v.into_iter().map(normalized).collect(),
        powers: Vec::new(),
        residual_trace: trace,
        converged,
        a,
        b,
    })
}

fn gamma_sq(split: &AmplitudeSplit, l: usize) -> f64 {
    match split {
        AmplitudeSplit::Uniform(g) => g * g,
        AmplitudeSplit::PerElement(v) => v[l] * v[l],
    }
}
