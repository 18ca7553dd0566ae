//! Subcommand bodies shared by the binary and the tests.

use std::path::{Path, PathBuf};

use omnisurf_codebook::{build_area_grid, build_hierarchical_codebook};

use crate::config::ScenarioConfig;
use crate::gainmap::proposed_gain_map;
use crate::output::{
    ensure_dir, write_codebook_csv, write_gainmap_csv, write_metadata, write_selection_csv, write_summary_csv,
    write_sweep_csv, write_text,
};
use crate::schemes::{Environment, Trained};
use crate::sweep::{make_drop, snr_sweep, Execution};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub message: String,
}

fn prepare(cfg: &ScenarioConfig) -> Result<(Environment, PathBuf), HarnessError> {
    let env = Environment::new(cfg.clone())?;
    let dir = cfg.output_dir();
    ensure_dir(&dir)?;
    Ok((env, dir))
}

pub fn design_codebook(cfg: &ScenarioConfig) -> Result<CommandOutput, HarnessError> {
    let (env, dir) = prepare(cfg)?;
    let s = &env.scene;
    let c = &cfg.codebook;
    let grid = build_area_grid(&s.grid_spec(c.areas, &c.rings), &s.ios, s.lambda)?;
    let cb = build_hierarchical_codebook(&grid, c.gain)?;
    let rows = cb.export_rows();
    let path = dir.join("codebook.csv");
    write_codebook_csv(&path, &rows)?;
    let mut res = toml::Table::new();
    res.insert("depth".into(), (cb.depth as i64).into());
    res.insert("codewords".into(), (rows.len() as i64).into());
    let meta = write_metadata(&dir, "design-codebook", cfg, res)?;
    Ok(CommandOutput {
        files: vec![path, meta],
        message: format!("{} codewords, depth {}", rows.len(), cb.depth),
    })
}

pub fn train(cfg: &ScenarioConfig) -> Result<CommandOutput, HarnessError> {
    let (env, dir) = prepare(cfg)?;
    let c = &cfg.codebook;
    let scheme = Trained::shared("proposed", env.tree(c.areas, &c.rings)?);
    let drop = make_drop(&env, cfg.seed)?;
    let report = scheme.train(&env, &drop)?;
    let mut text = String::new();
    for (k, u) in drop.users.iter().enumerate() {
        let p = u.position;
        text.push_str(&format!(
            "user={} position=({}, {}, {}) side={:?} model={:?}\n",
            k + 1,
            p.x,
            p.y,
            p.z,
            u.side,
            u.model
        ));
    }
    text.push_str(&report.to_string());
    text.push('\n');
    let path = dir.join("training.txt");
    write_text(&path, &text)?;
    let mut res = toml::Table::new();
    res.insert("seed".into(), (cfg.seed as i64).into());
    res.insert("total_slots".into(), (report.total_slots() as i64).into());
    let meta = write_metadata(&dir, "train", cfg, res)?;
    Ok(CommandOutput {
        files: vec![path, meta],
        message: format!("trained {} users in {} slots", report.users.len(), report.total_slots()),
    })
}

/// Writes `sweep.csv`, `summary.csv`, `selection.csv` and metadata into `dir`.
pub fn sweep_into(cfg: &ScenarioConfig, dir: &Path, exec: Execution) -> Result<CommandOutput, HarnessError> {
    let env = Environment::new(cfg.clone())?;
    ensure_dir(dir)?;
    let result = snr_sweep(&env, exec)?;
    let sweep = dir.join("sweep.csv");
    let summary = dir.join("summary.csv");
    let selection = dir.join("selection.csv");
    write_sweep_csv(&sweep, &result)?;
    write_summary_csv(&summary, &result)?;
    write_selection_csv(&selection, &result)?;
    let mut res = toml::Table::new();
    res.insert("rows".into(), (result.rows.len() as i64).into());
    let meta = write_metadata(dir, "sweep", cfg, res)?;
    Ok(CommandOutput {
        files: vec![sweep, summary, selection, meta],
        message: format!("{} rows", result.rows.len()),
    })
}

pub fn sweep(cfg: &ScenarioConfig, exec: Execution) -> Result<CommandOutput, HarnessError> {
    sweep_into(cfg, &cfg.output_dir(), exec)
}

pub fn gainmap(cfg: &ScenarioConfig) -> Result<CommandOutput, HarnessError> {
    let (env, dir) = prepare(cfg)?;
    let map = proposed_gain_map(&env)?;
    let path = dir.join("gainmap.csv");
    write_gainmap_csv(&path, &map)?;
    let ch = &map.check;
    let g = &map.grid;
    let mut res = toml::Table::new();
    res.insert("leaf".into(), (cfg.gainmap.leaf as i64).into());
    let peak = |(i, j): (usize, usize)| toml::Value::from(vec![g.xs[i], g.ys[j]]);
    res.insert("reflective_peak".into(), peak(ch.reflective_peak));
    res.insert("refractive_peak".into(), peak(ch.refractive_peak));
    res.insert("peaks_mirrored".into(), ch.peaks_mirrored.into());
    res.insert("ratio".into(), ch.ratio.into());
    res.insert("expected_ratio".into(), ch.expected_ratio.into());
    let meta = write_metadata(&dir, "gainmap", cfg, res)?;
    Ok(CommandOutput {
        files: vec![path, meta],
        message: format!(
            "peaks mirrored: {}, gain ratio {:.9} (expected {:.9})",
            ch.peaks_mirrored, ch.ratio, ch.expected_ratio
        ),
    })
}
