//! Result files.

use std::fs;
use std::path::{Path, PathBuf};

use omnisurf_codebook::CodebookRow;

use crate::config::ScenarioConfig;
use crate::gainmap::GainMap;
use crate::sweep::ExperimentResult;
use crate::HarnessError;

pub const SWEEP_HEADER: [&str; 6] = ["scheme", "snr_db", "seed", "sum_rate", "throughput", "train_slots"];
pub const GAINMAP_HEADER: [&str; 3] = ["x", "y", "gain"];
pub const CODEBOOK_HEADER: [&str; 5] = ["path", "coverage", "element", "re", "im"];
pub const SUMMARY_HEADER: [&str; 6] =
    ["scheme", "snr_db", "mean_sum_rate", "std_sum_rate", "mean_throughput", "std_throughput"];
pub const SELECTION_HEADER: [&str; 5] = ["scheme", "seed", "user", "leaf", "upper_slots"];

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_sweep_csv(path: &Path, result: &ExperimentResult) -> Result<(), HarnessError> {
    write_csv(
        path,
        &SWEEP_HEADER,
        result.rows.iter().map(|r| {
            vec![
                r.scheme.clone(),
                num(r.snr_db),
                r.seed.to_string(),
                num(r.sum_rate),
                num(r.throughput),
                r.train_slots.to_string(),
            ]
        }),
    )
}

pub fn write_summary_csv(path: &Path, result: &ExperimentResult) -> Result<(), HarnessError> {
    write_csv(
        path,
        &SUMMARY_HEADER,
        result.summary().into_iter().map(|s| {
            vec![
                s.scheme,
                num(s.snr_db),
                num(s.mean_sum_rate),
                num(s.std_sum_rate),
                num(s.mean_throughput),
                num(s.std_throughput),
            ]
        }),
    )
}

/// Selected leaf per user; leaves do not depend on SNR, so one block per
/// (scheme, seed).
pub fn write_selection_csv(path: &Path, result: &ExperimentResult) -> Result<(), HarnessError> {
    let first_snr = result.rows.first().map(|r| r.snr_db);
    write_csv(
        path,
        &SELECTION_HEADER,
        result.rows.iter().filter(|r| Some(r.snr_db) == first_snr).flat_map(|r| {
            r.leaves.iter().enumerate().map(move |(k, l)| {
                vec![r.scheme.clone(), r.seed.to_string(), (k + 1).to_string(), l.to_string(), r.upper_slots.to_string()]
            })
        }),
    )
}

pub fn write_gainmap_csv(path: &Path, map: &GainMap) -> Result<(), HarnessError> {
    write_csv(path, &GAINMAP_HEADER, map.samples().map(|(x, y, g)| vec![num(x), num(y), num(g)]))
}

pub fn write_codebook_csv(path: &Path, rows: &[CodebookRow]) -> Result<(), HarnessError> {
    write_csv(
        path,
        &CODEBOOK_HEADER,
        rows.iter().flat_map(|r| {
            let cov = r.coverage.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
            r.q.iter().enumerate().map(move |(l, z)| {
                vec![r.path.clone(), cov.clone(), (l + 1).to_string(), num(z.re), num(z.im)]
            })
        }),
    )
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Run metadata: tool, version, command, extra results and the full
/// configuration, as TOML. Contains nothing time- or host-dependent.
pub fn metadata(command: &str, cfg: &ScenarioConfig, results: toml::Table) -> String {
    let mut run = toml::Table::new();
    run.insert("tool".into(), env!("CARGO_PKG_NAME").into());
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    run.insert("command".into(), command.into());
    run.insert("combiner_schedule".into(), "broadside during codeword layers, full sweep after".into());
    run.insert("parallel_feature".into(), cfg!(feature = "parallel").into());
    let mut doc = toml::Table::new();
    doc.insert("run".into(), run.into());
    if !results.is_empty() {
        doc.insert("results".into(), results.into());
    }
    let config = toml::Table::try_from(cfg).expect("config is always serializable");
    doc.insert("config".into(), config.into());
    toml::to_string(&doc).expect("metadata is always serializable")
}

pub fn write_metadata(
    dir: &Path,
    command: &str,
    cfg: &ScenarioConfig,
    results: toml::Table,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(format!("{command}-metadata.toml"));
    write_text(&path, &metadata(command, cfg, results))?;
    Ok(path)
}
