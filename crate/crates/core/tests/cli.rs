use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[system]
mode = "digital"
n_c = 8
n_s = 8
n_r = 6
n_t = 4

[channel]
l = 2
min_separation = 0.5

[noise]
snr_db = [20.0, 30.0]

[estimator]
cp_restarts = 2

[mc]
runs = 3
parallel = false
"#;

fn pce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pce")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_estimate_oracle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("sim");

    let sim = pce(&["simulate", "--config", &cfg, "--run", "1", "--snr-index", "1", "--out-dir", s(&out_dir)]);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    for f in ["obs.cpt1", "h.cpt1", "truth.txt"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }

    let paths = dir.path().join("paths.txt");
    let est = pce(&[
        "estimate",
        "--config",
        &cfg,
        "--obs",
        s(&out_dir.join("obs.cpt1")),
        "--out",
        s(&paths),
        "--truth",
        s(&out_dir.join("h.cpt1")),
    ]);
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));
    assert!(paths.is_file());
    let stdout = String::from_utf8_lossy(&est.stdout);
    assert!(stdout.contains("rel_err"), "{stdout}");

    let oracle = pce(&["oracle", "--config", &cfg, "--obs", s(&out_dir.join("obs.cpt1")), "--grid", "32"]);
    assert!(oracle.status.success(), "{}", String::from_utf8_lossy(&oracle.stderr));
}

#[test]
fn campaign_writes_one_row_per_run_and_snr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let csv = dir.path().join("out.csv");
    let run = pce(&["campaign", "--config", &cfg, "--out", s(&csv)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nbogus = 1\n");
    let run = pce(&["campaign", "--config", &cfg]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn missing_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = pce(&[
        "estimate",
        "--config",
        &cfg,
        "--obs",
        s(&dir.path().join("absent.cpt1")),
        "--out",
        s(&dir.path().join("p.txt")),
    ]);
    assert_eq!(run.status.code(), Some(3));
    let run = pce(&["campaign", "--config", s(&dir.path().join("absent.toml"))]);
    assert_eq!(run.status.code(), Some(3));
}
