use std::path::Path;

use omnisurf_harness::{HarnessError, ScenarioConfig};

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn shipped_desk_config_is_the_default_scene() {
    let mut cfg = ScenarioConfig::load(&configs().join("desk.toml")).unwrap();
    cfg.output.dir = ScenarioConfig::desk().output.dir;
    assert_eq!(cfg, ScenarioConfig::desk());
}

#[test]
fn shipped_full_size_config_parses() {
    let cfg = ScenarioConfig::load(&configs().join("full.toml")).unwrap();
    assert_eq!(cfg.ios.horizontal * cfg.ios.vertical, 1024);
    assert_eq!(cfg.bs.horizontal * cfg.bs.vertical, 32);
    assert_eq!(cfg.users.horizontal * cfg.users.vertical, 4);
    assert_eq!(cfg.users.count(), 4);
}

#[test]
fn toml_round_trip() {
    let cfg = ScenarioConfig::desk();
    assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn seed_is_mandatory() {
    let text = ScenarioConfig::desk().to_toml().replace("seed = 1\n", "");
    assert!(matches!(ScenarioConfig::from_toml(&text), Err(HarnessError::Config(_))));
}

#[test]
fn sections_default_when_missing() {
    let cfg = ScenarioConfig::from_toml("seed = 1\nfrequency_hz = 26e9\n").unwrap();
    assert_eq!(cfg, ScenarioConfig::desk());
}

fn rejects(edit: impl FnOnce(&mut ScenarioConfig)) {
    let mut cfg = ScenarioConfig::desk();
    edit(&mut cfg);
    let err = cfg.validate().unwrap_err();
    assert_eq!(err.exit_code(), 1, "{err}");
}

#[test]
fn invalid_values_are_rejected() {
    rejects(|c| c.frequency_hz = 0.0);
    rejects(|c| c.ios.spacing = -0.5);
    rejects(|c| c.codebook.areas = 24);
    rejects(|c| c.codebook.areas = 128);
    rejects(|c| c.codebook.rings = vec![0.25, 1.0, 2.0]);
    rejects(|c| c.surface.gamma_t = 1.0);
    rejects(|c| c.surface.phase_bits = Some(0));
    rejects(|c| c.users.regions.pop().map(|_| ()).unwrap());
    rejects(|c| c.drop.far = [2.5, 1.5]);
    rejects(|c| c.sweep.snr_db.clear());
    rejects(|c| c.sweep.noise_variance = 0.0);
    rejects(|c| c.sweep.schemes.push("oracle".into()));
    rejects(|c| c.bs.position[1] = -0.1);
    rejects(|c| c.training.combiners = 0);
}

#[test]
fn unknown_keys_are_rejected() {
    let text = ScenarioConfig::desk().to_toml().replace("[drop]\n", "[drop]\nradius = 3\n");
    assert!(ScenarioConfig::from_toml(&text).is_err());
}

#[test]
fn numerical_errors_map_to_exit_code_two() {
    assert_eq!(HarnessError::Numerical("x".into()).exit_code(), 2);
    assert_eq!(HarnessError::Config("x".into()).exit_code(), 1);
}
