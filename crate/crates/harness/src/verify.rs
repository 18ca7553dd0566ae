//! Self-checks run by `omnisurf verify` and the acceptance test.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use omnisurf_beamforming::{
    alternating_factorization, least_squares_precoders, optimize_phases, phase_coefficients, water_filling,
    FactorizationConfig,
};
use omnisurf_channel::{
    area_equivalent_channel, far_field_user_channel, near_field_user_channel, AreaLocation,
    CMatrix, CVector,
};
use omnisurf_codebook::{synthesize, Coverage, SynthesisOptions};
use omnisurf_geometry::{ArrayGeometry, Direction, Point3, Side};
use omnisurf_surface::{AmplitudeSplit, PhaseMode, SurfaceConfiguration};
use omnisurf_training::{exhaustive_search_oracle, run_training, TrainingUser};
use rand::Rng;

use crate::commands::sweep_into;
use crate::config::{RegionSpec, ScenarioConfig};
use crate::scene::sample_user;
use crate::schemes::{stream_rng, Environment, SCHEME_NAMES};
use crate::sweep::{snr_sweep, Execution, ExperimentResult};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} {} {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    f: impl FnOnce() -> Result<(bool, String), HarnessError>,
) -> CriterionReport {
    let t = Instant::now();
    let (mut passed, mut detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    let elapsed = t.elapsed();
    if let Some(l) = limit {
        if elapsed > l {
            passed = false;
            detail.push_str(&format!("; exceeded {} s", l.as_secs()));
        }
    }
    CriterionReport { id, name, passed, detail, elapsed }
}

fn desk() -> Result<Environment, HarnessError> {
    Environment::new(ScenarioConfig::desk())
}

fn random_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn gain(h: &CVector, x: &CVector) -> f64 {
    h.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<Complex64>().norm()
}

/// Mirrored reflective/refractive gains of random surfaces keep the ratio
/// `gamma_t / gamma_r`.
pub fn symmetry(configs: usize) -> CriterionReport {
    timed(1, "mirror symmetry", Some(Duration::from_secs(30)), || {
        let env = desk()?;
        let s = &env.scene;
        let l = s.ios.element_count();
        let mut worst: f64 = 0.0;
        let mut pairs = 0;
        for i in 0..configs {
            let mut rng = stream_rng(1_000 + i as u64, 3);
            let c = rng.random_range(0.0..2.0 * PI);
            let phases: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            let surf = SurfaceConfiguration::from_phases(&phases, &AmplitudeSplit::equal(), c, PhaseMode::Continuous)?;
            let hv = &s.h_bi * random_vector(&mut rng, s.h_bi.ncols());
            let xt = surf.psi_t().component_mul(&hv);
            let xr = surf.psi_r().component_mul(&hv);
            let expected = surf.elements[0].gamma_t / surf.elements[0].gamma_r;
            let r = rng.random_range(0.05..0.9) * s.rayleigh;
            let az: f64 = rng.random_range(-1.4..1.4);
            let el: f64 = rng.random_range(-0.5..0.5);
            let p = s.ios.origin + Point3::new(r * az.sin() * el.cos(), r * az.cos() * el.cos(), r * el.sin());
            let near = AreaLocation::Near(p);
            let dir = Direction::new(rng.random_range(-1.0..1.0), rng.random_range(-1.4..1.4));
            let far = AreaLocation::Far { direction: dir, distance: rng.random_range(2.0..20.0) * s.rayleigh };
            for loc in [near, far] {
                let h1 = area_equivalent_channel(&loc, &s.ios, s.lambda)?;
                let h2 = area_equivalent_channel(&loc.mirrored(), &s.ios, s.lambda)?;
                let ratio = gain(&h1, &xt) / gain(&h2, &xr);
                worst = worst.max((ratio - expected).abs() / expected);
                pairs += 1;
            }
        }
        Ok((worst < 1e-6 && configs >= 50, format!("{configs} surfaces, {pairs} mirrored pairs, worst relative error {worst:.2e}")))
    })
}

/// Least-squares codewords reproduce their coverage indicator.
pub fn interpolation(pairs: usize) -> CriterionReport {
    timed(2, "codeword interpolation", Some(Duration::from_secs(30)), || {
        let env = desk()?;
        let s = &env.scene;
        let mut rng = stream_rng(2_000, 3);
        let mut worst: f64 = 0.0;
        let mut accepted = 0;
        let mut rejected = 0;
        while accepted < pairs {
            let p = 1usize << rng.random_range(1..5);
            let rows: Vec<CVector> = (0..p)
                .map(|_| {
                    let r = rng.random_range(0.05..3.0) * s.rayleigh;
                    let az: f64 = rng.random_range(-1.3..1.3);
                    let el: f64 = rng.random_range(-0.6..0.6);
                    let loc = AreaLocation::Near(
                        s.ios.origin + Point3::new(r * az.sin() * el.cos(), r * az.cos() * el.cos(), r * el.sin()),
                    );
                    area_equivalent_channel(&loc, &s.ios, s.lambda)
                })
                .collect::<Result<_, _>>()?;
            let h = CMatrix::from_fn(p, s.ios.element_count(), |i, j| rows[i][j]);
            let mut cov: Coverage = (1..=p).filter(|_| rng.random_bool(0.5)).collect();
            if cov.is_empty() {
                cov.insert(rng.random_range(1..=p));
            }
            let opts = SynthesisOptions { regularize: false, cond_limit: 1e8, ..SynthesisOptions::default() };
            let Ok((q, _)) = synthesize(&h, &cov, 1.0, opts) else {
                rejected += 1;
                continue;
            };
            let hq = &h * &q;
            for (i, v) in hq.iter().enumerate() {
                let want = if cov.contains(&(i + 1)) { 1.0 } else { 0.0 };
                worst = worst.max((v - Complex64::from(want)).norm());
            }
            accepted += 1;
        }
        Ok((
            worst < 1e-8,
            format!("{accepted} grids ({rejected} ill-conditioned skipped), worst |Hq - Cu| {worst:.2e}"),
        ))
    })
}

/// Hierarchical training against exhaustive search on single-user drops.
pub fn training_oracle(drops: usize) -> CriterionReport {
    timed(3, "training vs oracle", Some(Duration::from_secs(300)), || {
        let env = desk()?;
        let cfg = &env.config;
        let tree = env.tree(cfg.codebook.areas, &cfg.codebook.rings)?;
        let tcfg = env.training_config();
        let cells = cfg.codebook.areas / (2 * cfg.codebook.rings.len());
        let mut hits = 0;
        let mut worst: f64 = 1.0;
        for i in 0..drops as u64 {
            let mut rng = stream_rng(3_000 + i, 0);
            let side = if rng.random_bool(0.5) { Side::Reflective } else { Side::Refractive };
            let region = if rng.random_bool(0.5) { RegionSpec::Near } else { RegionSpec::Far };
            let p = sample_user(&cfg.drop, cells, env.scene.rayleigh, env.scene.ios.origin, side, region, &mut rng)?;
            let u = env.scene.user_at(p.position)?;
            let user = TrainingUser { channel: u.channel, side: u.side };
            let mut noise = stream_rng(3_000 + i, 2);
            let report = run_training(&tree, std::slice::from_ref(&user), &env.scene.combiners, &tcfg, &mut noise)?;
            let oracle = exhaustive_search_oracle(&tree, &user, &env.scene.combiners, &tcfg, &mut noise)?;
            let got = &report.users[0];
            if got.leaf == oracle.leaf || got.power() >= oracle.power {
                hits += 1;
            }
            worst = worst.min(got.power() / oracle.power);
        }
        let rate = hits as f64 / drops as f64;
        Ok((
            drops >= 200 && rate >= 0.95 && worst >= 0.5,
            format!("{hits}/{drops} optimal leaves ({:.1}%), worst power ratio {worst:.3}", 100.0 * rate),
        ))
    })
}

/// Configuration of the scheme comparison: desk scene, all schemes.
pub fn comparison_config(seeds: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::desk();
    cfg.sweep.seeds = seeds;
    cfg.sweep.snr_db = vec![0.0, 10.0, 20.0];
    cfg.sweep.frame_slots = 1000;
    cfg.sweep.schemes = SCHEME_NAMES.iter().map(|s| s.to_string()).collect();
    cfg
}

fn fmt_means(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/")
}

/// Mean-rate ordering of the codebook schemes.
pub fn rate_ordering(result: &ExperimentResult, cfg: &ScenarioConfig) -> CriterionReport {
    timed(4, "sum-rate ordering", None, || {
        let snrs = &cfg.sweep.snr_db;
        let m = |s: &str| result.means(s, snrs, |r| r.sum_rate);
        let (pf, pr, near, far) = (m("perfect"), m("proposed"), m("near-only"), m("far-only"));
        let mut ok = cfg.sweep.seeds >= 30;
        for i in 0..snrs.len() {
            ok &= pf[i] >= pr[i] && pr[i] >= near[i].max(far[i]);
        }
        let top = snrs.iter().position(|&s| s == 20.0).ok_or_else(|| HarnessError::Config("20 dB missing".into()))?;
        let ratio = pr[top] / pf[top];
        ok &= ratio >= 0.85;
        for v in [&pf, &pr, &near, &far] {
            ok &= v.windows(2).all(|w| w[1] >= w[0]);
        }
        Ok((
            ok,
            format!(
                "perfect {} proposed {} near-only {} far-only {}; proposed/perfect at 20 dB {ratio:.3}",
                fmt_means(&pf),
                fmt_means(&pr),
                fmt_means(&near),
                fmt_means(&far)
            ),
        ))
    })
}

/// Training overhead and throughput against the two-surface baselines.
pub fn dual_surface(result: &ExperimentResult, cfg: &ScenarioConfig) -> CriterionReport {
    timed(5, "two-surface comparison", None, || {
        let snrs = &cfg.sweep.snr_db;
        let slots_ok = result
            .rows
            .iter()
            .filter(|r| r.scheme == "proposed")
            .all(|r| {
                result
                    .rows
                    .iter()
                    .filter(|d| d.scheme == "dual-equal-resolution" && d.seed == r.seed && d.snr_db == r.snr_db)
                    .all(|d| d.upper_slots == 2 * r.upper_slots)
            });
        let tp = |s: &str| result.means(s, snrs, |r| r.throughput);
        let sr = |s: &str| result.means(s, snrs, |r| r.sum_rate);
        let (ios_tp, dual_tp) = (tp("proposed"), tp("dual-equal-resolution"));
        let (ios_sr, dual_sr) = (sr("proposed"), sr("dual-equal-overhead"));
        let tp_ok = ios_tp.iter().zip(&dual_tp).all(|(a, b)| a >= b);
        let sr_ok = ios_sr.iter().zip(&dual_sr).all(|(a, b)| b <= a);
        let upper = result.rows.iter().find(|r| r.scheme == "proposed").map_or(0, |r| r.upper_slots);
        Ok((
            cfg.sweep.seeds >= 30 && slots_ok && tp_ok && sr_ok,
            format!(
                "upper slots {upper} vs {} (halved: {slots_ok}); throughput {} vs {}; equal-overhead rate {} vs {}",
                2 * upper,
                fmt_means(&ios_tp),
                fmt_means(&dual_tp),
                fmt_means(&ios_sr),
                fmt_means(&dual_sr)
            ),
        ))
    })
}

/// Water level normalization and closed-form cases.
pub fn water_filling_exactness(cases: usize) -> CriterionReport {
    timed(6, "water-filling", None, || {
        let mut rng = stream_rng(6_000, 3);
        let mut worst: f64 = 0.0;
        let mut negative = false;
        for _ in 0..cases {
            let k = rng.random_range(1..9);
            let gains: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..3.0))).collect();
            let noise = rng.random_range(0.1..2.0);
            let budget = 10f64.powf(rng.random_range(-1.0..2.0));
            let wf = water_filling(&gains, noise, budget)?;
            let sum: f64 = gains.iter().map(|g| (wf.level - g * noise).max(0.0)).sum();
            worst = worst.max((sum - budget).abs());
            negative |= wf.powers.iter().any(|p| *p < 0.0);
        }
        let single = water_filling(&[2.0], 1.0, 6.0)?.powers == vec![3.0];
        let pair = water_filling(&[1.0, 2.0], 1.0, 3.0)?.powers == vec![2.0, 0.5];
        let inactive = water_filling(&[1.0, 10.0], 1.0, 2.0)?.powers == vec![2.0, 0.0];
        Ok((
            worst < 1e-9 && !negative && single && pair && inactive,
            format!(
                "{cases} vectors, worst normalization error {worst:.2e}, closed forms {}",
                if single && pair && inactive { "exact" } else { "mismatch" }
            ),
        ))
    })
}

/// Residual trace and per-element phase optimality of the factorization.
pub fn solver_monotonicity(seeds: usize) -> CriterionReport {
    timed(7, "solver monotonicity", None, || {
        let env = desk()?;
        let s = &env.scene;
        let cfg = &env.config;
        let tree = env.tree(cfg.codebook.areas, &cfg.codebook.rings)?;
        let fc = FactorizationConfig {
            split: s.split.clone(),
            c: s.coupling,
            tolerance: cfg.beamforming.tolerance,
            max_iterations: cfg.beamforming.max_iterations,
        };
        let mut monotone = true;
        let mut worst_gap: f64 = 0.0;
        for i in 0..seeds as u64 {
            let mut rng = stream_rng(7_000 + i, 1);
            let targets: Vec<CVector> = (0..cfg.users.count())
                .map(|_| tree.leaf(rng.random_range(1..=tree.leaf_count())).target.clone())
                .collect();
            let sol = alternating_factorization(&targets, &s.h_bi, &fc, &mut rng)?;
            monotone &= sol.residual_trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            let v = least_squares_precoders(&sol.surface, &s.h_bi, &targets)?;
            let next = optimize_phases(&targets, &s.h_bi, &v, &sol.surface)?;
            let b = phase_coefficients(&targets, &s.h_bi, &v);
            for (bl, phi) in b.iter().zip(next.phases_t()) {
                let chosen = (bl * Complex64::from_polar(1.0, phi)).re;
                let scan = (0..4096)
                    .map(|n| (bl * Complex64::from_polar(1.0, 2.0 * PI * n as f64 / 4096.0)).re)
                    .fold(f64::NEG_INFINITY, f64::max);
                worst_gap = worst_gap.max((scan - chosen) / bl.norm().max(f64::MIN_POSITIVE));
            }
        }
        let grid_ok = worst_gap <= 1e-12;
        Ok((
            monotone && grid_ok,
            format!("{seeds} seeds, traces non-increasing: {monotone}, worst grid-scan excess {worst_gap:.1e}"),
        ))
    })
}

/// Spherical and planar user channels agree far beyond the Rayleigh distance.
pub fn model_consistency(positions: usize) -> CriterionReport {
    timed(8, "near/far model consistency", None, || {
        let env = desk()?;
        let s = &env.scene;
        let u = &env.config.users;
        let mut rng = stream_rng(8_000, 3);
        let (mut ph, mut mag): (f64, f64) = (0.0, 0.0);
        for _ in 0..positions {
            let d = rng.random_range(50.0..200.0) * s.rayleigh;
            let dir = Direction::new(rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0));
            let centre = s.ios.origin + dir.unit_vector() * d;
            let user = ArrayGeometry::uniform(centre, u.horizontal, u.vertical, u.spacing * s.lambda)?;
            let near = near_field_user_channel(&user, &s.ios, s.lambda)?;
            let (to_user, dist) = Direction::between(s.ios.origin, centre);
            let (to_ios, _) = Direction::between(centre, s.ios.origin);
            let far = far_field_user_channel(to_ios, to_user, dist, &user, &s.ios, s.lambda)?;
            let align: Complex64 = near.iter().zip(far.iter()).map(|(a, b)| a * b.conj()).sum();
            let rot = Complex64::from_polar(1.0, align.arg());
            for (a, b) in near.iter().zip(far.iter()) {
                ph = ph.max((a / (b * rot)).arg().abs());
                mag = mag.max((a.norm() - b.norm()).abs() / b.norm());
            }
        }
        Ok((
            ph < 0.05 && mag < 0.01,
            format!("{positions} positions at 50-200 Rayleigh distances, worst phase {ph:.4} rad, magnitude {:.3}%", 100.0 * mag),
        ))
    })
}

/// Two sweeps of one configuration write identical files.
pub fn determinism(cfg: &ScenarioConfig) -> CriterionReport {
    timed(9, "determinism", None, || {
        let a = tempfile::tempdir().map_err(|e| HarnessError::io(std::env::temp_dir(), e))?;
        let b = tempfile::tempdir().map_err(|e| HarnessError::io(std::env::temp_dir(), e))?;
        let out_a = sweep_into(cfg, a.path(), Execution::Sequential)?;
        let out_b = sweep_into(cfg, b.path(), Execution::default())?;
        let mut same = out_a.files.len() == out_b.files.len();
        let mut bytes = 0;
        for (x, y) in out_a.files.iter().zip(&out_b.files) {
            let dx = std::fs::read(x).map_err(|e| HarnessError::io(x, e))?;
            let dy = std::fs::read(y).map_err(|e| HarnessError::io(y, e))?;
            same &= dx == dy;
            bytes += dx.len();
        }
        Ok((same, format!("{} files, {bytes} bytes, identical: {same}", out_a.files.len())))
    })
}

/// Runs every criterion at full size.
pub fn run_all(exec: Execution) -> Vec<CriterionReport> {
    let cfg = comparison_config(30);
    let t = Instant::now();
    let sweep = Environment::new(cfg.clone()).and_then(|env| snr_sweep(&env, exec));
    let sweep_time = t.elapsed();
    let (c4, c5) = match &sweep {
        Ok(r) => {
            let mut c4 = rate_ordering(r, &cfg);
            let mut c5 = dual_surface(r, &cfg);
            c4.elapsed += sweep_time;
            c5.elapsed += sweep_time;
            (c4, c5)
        }
        Err(e) => {
            let fail = |id, name| CriterionReport {
                id,
                name,
                passed: false,
                detail: format!("sweep failed: {e}"),
                elapsed: sweep_time,
            };
            (fail(4, "sum-rate ordering"), fail(5, "two-surface comparison"))
        }
    };
    vec![
        symmetry(60),
        interpolation(120),
        training_oracle(200),
        c4,
        c5,
        water_filling_exactness(1000),
        solver_monotonicity(50),
        model_consistency(60),
        determinism(&cfg),
    ]
}
