use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_omnisurf");

fn small_config(dir: &Path) -> std::path::PathBuf {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/desk.toml"))
        .unwrap()
        .replace("seeds = 30", "seeds = 2")
        .replace("nx = 81", "nx = 21");
    let path = dir.join("small.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(BIN).args(args).env("OMNISURF_OUT_DIR", out).output().unwrap()
}

#[test]
fn subcommands_write_their_files_into_the_override_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("out");
    let cfg = cfg.to_str().unwrap();
    for (cmd, files) in [
        ("design-codebook", &["codebook.csv", "design-codebook-metadata.toml"][..]),
        ("train", &["training.txt", "train-metadata.toml"]),
        ("sweep", &["sweep.csv", "summary.csv", "selection.csv", "sweep-metadata.toml"]),
        ("gainmap", &["gainmap.csv", "gainmap-metadata.toml"]),
    ] {
        let o = run(&[cmd, cfg], &out);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        for f in files {
            assert!(out.join(f).is_file(), "{cmd} did not write {f}");
        }
    }
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("scheme,snr_db,seed,sum_rate,throughput,train_slots\n"));
    assert_eq!(sweep.lines().count(), 1 + 6 * 3 * 2);
    let gain = std::fs::read_to_string(out.join("gainmap.csv")).unwrap();
    assert!(gain.starts_with("x,y,gain\n"));
    assert_eq!(gain.lines().count(), 1 + 21 * 40);
    let meta = std::fs::read_to_string(out.join("sweep-metadata.toml")).unwrap();
    let parsed: toml::Table = meta.parse().unwrap();
    assert_eq!(parsed["run"]["command"].as_str(), Some("sweep"));
    assert_eq!(parsed["config"]["sweep"]["seeds"].as_integer(), Some(2));
    let training = std::fs::read_to_string(out.join("training.txt")).unwrap();
    assert!(training.trim_end().ends_with("total=30"), "{training}");
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["sweep", cfg.to_str().unwrap()], &a).status.success());
    assert!(run(&["--sequential", "sweep", cfg.to_str().unwrap()], &b).status.success());
    for f in ["sweep.csv", "summary.csv", "selection.csv", "sweep-metadata.toml"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn validation_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\nfrequency_hz = -1.0\n").unwrap();
    let o = run(&["sweep", bad.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("frequency_hz"));
    let o = run(&["train", tmp.path().join("missing.toml").to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gainmap_leaf_out_of_range_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let text = std::fs::read_to_string(&cfg).unwrap().replace("leaf = 6", "leaf = 99");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["gainmap", cfg.to_str().unwrap()], &tmp.path().join("o"));
    assert_eq!(o.status.code(), Some(1));
}
