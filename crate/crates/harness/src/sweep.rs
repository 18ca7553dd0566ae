//! SNR sweeps over schemes and seeded drops.

use omnisurf_beamforming::throughput;

use crate::scene::drop_users;
use crate::schemes::{build_schemes, DropInstance, Environment, Scheme, SchemeOutcome};
use crate::HarnessError;

/// How independent jobs are executed. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, keeping input order. Falls back to sequential
/// execution when built without the `parallel` feature.
pub fn map_jobs<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: String,
    pub snr_db: f64,
    pub seed: u64,
    pub sum_rate: f64,
    pub throughput: f64,
    pub train_slots: usize,
    pub upper_slots: usize,
    pub leaves: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: String,
    pub snr_db: f64,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub mean_throughput: f64,
    pub std_throughput: f64,
}

/// Rows ordered by scheme (configuration order), SNR, then seed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<SweepRow>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

impl ExperimentResult {
    pub fn rows_for<'a>(&'a self, scheme: &'a str, snr_db: f64) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.scheme == scheme && r.snr_db == snr_db)
    }

    /// Mean and sample standard deviation per (scheme, SNR), in row order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in &self.rows {
            if !keys.iter().any(|(s, x)| *s == r.scheme && *x == r.snr_db) {
                keys.push((r.scheme.clone(), r.snr_db));
            }
        }
        keys.into_iter()
            .map(|(scheme, snr_db)| {
                let rates: Vec<f64> = self.rows_for(&scheme, snr_db).map(|r| r.sum_rate).collect();
                let tps: Vec<f64> = self.rows_for(&scheme, snr_db).map(|r| r.throughput).collect();
                let (mean_sum_rate, std_sum_rate) = mean_std(&rates);
                let (mean_throughput, std_throughput) = mean_std(&tps);
                SummaryRow { scheme, snr_db, mean_sum_rate, std_sum_rate, mean_throughput, std_throughput }
            })
            .collect()
    }

    /// Mean of `field` per configured SNR for one scheme.
    pub fn means(&self, scheme: &str, snrs: &[f64], field: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        snrs.iter()
            .map(|&s| {
                let v: Vec<f64> = self.rows_for(scheme, s).map(&field).collect();
                mean_std(&v).0
            })
            .collect()
    }
}

/// Drop seeds of a sweep: `seed, seed + 1, ...`.
pub fn drop_seeds(env: &Environment) -> Vec<u64> {
    (0..env.config.sweep.seeds as u64).map(|i| env.config.seed.wrapping_add(i)).collect()
}

/// Builds the users of drop `seed`.
pub fn make_drop(env: &Environment, seed: u64) -> Result<DropInstance, HarnessError> {
    let users = drop_users(&env.config, &env.scene, seed)?
        .into_iter()
        .map(|p| env.scene.user_at(p.position))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DropInstance { seed, users })
}

/// Runs every (scheme, drop) pair with the given schemes.
pub fn run_sweep(
    env: &Environment,
    schemes: &[Box<dyn Scheme>],
    exec: Execution,
) -> Result<ExperimentResult, HarnessError> {
    let seeds = drop_seeds(env);
    let drops: Vec<DropInstance> =
        map_jobs(&seeds, exec, |&s| make_drop(env, s)).into_iter().collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..schemes.len()).flat_map(|a| (0..drops.len()).map(move |b| (a, b))).collect();
    let outcomes: Vec<SchemeOutcome> = map_jobs(&jobs, exec, |&(a, b)| schemes[a].run(env, &drops[b]))
        .into_iter()
        .collect::<Result<_, _>>()?;

    let frame = env.config.sweep.frame_slots;
    let mut rows = Vec::with_capacity(jobs.len() * env.config.sweep.snr_db.len());
    for (a, scheme) in schemes.iter().enumerate() {
        for (i, &snr) in env.config.sweep.snr_db.iter().enumerate() {
            for (b, d) in drops.iter().enumerate() {
                let o = &outcomes[a * drops.len() + b];
                let rate = o.sum_rates[i];
                if !rate.is_finite() {
                    return Err(HarnessError::Numerical(format!(
                        "{} produced a non-finite sum rate at {snr} dB (seed {})",
                        scheme.name(),
                        d.seed
                    )));
                }
                rows.push(SweepRow {
                    scheme: scheme.name().to_string(),
                    snr_db: snr,
                    seed: d.seed,
                    sum_rate: rate,
                    throughput: throughput(rate, o.train_slots, frame)?,
                    train_slots: o.train_slots,
                    upper_slots: o.upper_slots,
                    leaves: o.leaves.clone(),
                });
            }
        }
    }
    Ok(ExperimentResult { rows })
}

/// Sweep over the configured schemes, SNRs and seeds.
pub fn snr_sweep(env: &Environment, exec: Execution) -> Result<ExperimentResult, HarnessError> {
    let schemes = build_schemes(env, &env.config.sweep.schemes)?;
    run_sweep(env, &schemes, exec)
}
