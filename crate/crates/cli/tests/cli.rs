use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use spde_galerkin_cli::{ExperimentConfig, QuantityReport};

const BIN: &str = env!("CARGO_BIN_EXE_spde-galerkin");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SMALL: &str = r#"
name = "small heat"
kind = "rates"

[model]
family = "heat"
s = 0.0
T = 0.5
covariance = { kind = "diagonal", exponent = 0.0 }
nonlinearity = { kind = "scaled-sine", amplitude = 1.0 }
initial = { position = [1.0] }

[discretization]
resolutions = [2, 4, 8]
N_ref = 32
M_steps = 32

[estimation]
M_paths = 120
seed = 11
functionals = [{ kind = "time-integral", phi = { kind = "gaussian-bump" }, t1 = 0.0, t2 = 0.5 }]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn bundled_configs_validate() {
    let mut count = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::load(&path).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert_eq!(count, 8);
}

#[test]
fn inadmissible_config_exits_with_rule() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &SMALL.replace("s = 0.0", "s = 0.6"));
    let out = Command::new(BIN).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"], "inadmissible");
    assert_eq!(diag["rule"], "s < s_Q");
}

#[test]
fn single_resolution_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one.toml", &SMALL.replace("[2, 4, 8]", "[8]"));
    let out = Command::new(BIN).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"], "invalid-config");
    assert!(diag["message"].as_str().unwrap().contains("at least 3"));
}

fn strip_runtime(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("runtime_seconds");
    v
}

#[test]
fn identical_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    // Same --out both times, so the embedded configs agree too.
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for round in 0..2 {
        let out = Command::new(BIN)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&a)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        if round == 0 {
            fs::rename(&a, &b).unwrap();
        }
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 3, "{names:?}");
    for name in &names {
        let (pa, pb) = (a.join(name), b.join(name));
        if pa.extension().is_some_and(|e| e == "csv") {
            assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap());
            let text = fs::read_to_string(&pa).unwrap();
            assert_eq!(text.lines().next().unwrap(), "quantity,N,estimate,stderr,paths,censored");
            assert_eq!(text.lines().count(), 1 + 2 * 3);
        } else {
            assert_eq!(strip_runtime(&pa), strip_runtime(&pb));
        }
    }
    let strong: QuantityReport =
        serde_json::from_str(&fs::read_to_string(a.join("small-heat.strong.json")).unwrap()).unwrap();
    assert_eq!(strong.seed, 11);
    assert_eq!(strong.points.len(), 3);
    let mut expected = ExperimentConfig::parse(SMALL).unwrap();
    expected.output.dir = a.clone();
    assert_eq!(strong.config, expected);
    assert!(strong.slope.is_some());
}

#[test]
fn seed_and_paths_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let out = Command::new(BIN)
        .args(["--seed", "5", "--paths", "100", "--out"])
        .arg(dir.path().join("r"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let r: QuantityReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r/small-heat.strong.json")).unwrap()).unwrap();
    assert_eq!(r.seed, 5);
    assert!(r.points.iter().all(|p| p.paths == 100));
}

#[test]
fn unknown_suite_is_rejected() {
    let out = Command::new(BIN).args(["--suite", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn suite_prints_pass_lines() {
    let out = Command::new(BIN).args(["--suite", "spectral-properties"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10, "{text}");
    assert!(!text.contains("FAIL"));
}
