//! End-to-end tests of the `lieflow` binary: exit codes, artifact shapes,
//! hashes, determinism, and a few spot-checked numerics.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lieflow"))
}

fn write_cfg(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_str(out)).unwrap()
}

const HEAT_TORUS: &str = r#"{
  "schema": "lieflow/1",
  "group": { "kind": "torus", "dim": 1 },
  "max_weight_norm": 8,
  "characteristics": { "a": [[0.5]] },
  "functions": [ { "name": "cos_theta" } ]
}"#;

#[test]
fn zeta_torus_matches_riemann() {
    let out = bin()
        .args(["zeta", "--group", "torus", "--s", "1", "--max-norm", "1000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let v = stdout_json(&out);
    let partial = v["partial_sum"].as_f64().unwrap();
    let target = std::f64::consts::PI.powi(2) / 3.0;
    assert!(
        ((partial - target) / target).abs() < 1e-3,
        "partial {partial} vs {target}"
    );
    assert_eq!(v["convergent"], serde_json::json!(true));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 16);

    let out = bin()
        .args(["zeta", "--group", "torus", "--s", "0.5", "--max-norm", "1000"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["convergent"], serde_json::json!(false));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = bin()
        .args(["symbol", "--config", "/definitely/not/here.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("config error"));
}

#[test]
fn empty_config_reports_missing_field_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "empty.json", "{}");
    let out = bin()
        .args(["symbol", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(err.contains("missing field"), "stderr: {err}");
    assert!(err.contains("line 1"), "stderr: {err}");
}

#[test]
fn unknown_key_is_named_in_the_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "unknown.json",
        r#"{
  "schema": "lieflow/1",
  "group": { "kind": "torus", "dim": 1 },
  "max_weight_norm": 4,
  "bogus_knob": 3,
  "functions": []
}"#,
    );
    let out = bin()
        .args(["symbol", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(err.contains("bogus_knob"), "stderr: {err}");
    assert!(err.contains("line 5"), "stderr: {err}");
}

#[test]
fn invalid_characteristics_fail_with_module_error_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "negc.json",
        r#"{
  "schema": "lieflow/1",
  "group": { "kind": "torus", "dim": 1 },
  "max_weight_norm": 4,
  "characteristics": { "c": -1.0 },
  "functions": [ { "name": "one" } ]
}"#,
    );
    let out = bin().args(["apply", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("InvalidCharacteristics"));
}

#[test]
fn apply_pure_killing_of_constant_is_minus_c() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "killing.json",
        r#"{
  "schema": "lieflow/1",
  "group": { "kind": "torus", "dim": 1 },
  "max_weight_norm": 4,
  "characteristics": { "c": 0.4 },
  "functions": [ { "name": "one" } ]
}"#,
    );
    let out = bin()
        .args(["apply", "--eval-resolution", "8", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "function_index,sigma_index,x,value");
    let mut n = 0;
    for line in lines {
        let value: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((value + 0.4).abs() < 1e-12, "row {line}");
        n += 1;
    }
    assert_eq!(n, 8);
}

#[test]
fn symbol_su2_casimir_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "casimir.json",
        r#"{
  "schema": "lieflow/1",
  "group": { "kind": "su2" },
  "max_weight_norm": 2,
  "characteristics": { "a": [[1,0,0],[0,1,0],[0,0,1]] },
  "functions": []
}"#,
    );
    let out = bin().args(["symbol", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    // k = 1 (two-dimensional irrep): diagonal entries −ℓ(ℓ+1) = −3/4.
    for (r, c, want) in [(0usize, 0usize, -0.75), (0, 1, 0.0), (1, 1, -0.75)] {
        let prefix = format!("SU(2),0,[1],{r},{c},");
        let row = text
            .lines()
            .find(|l| l.starts_with(&prefix))
            .unwrap_or_else(|| panic!("no row {prefix}"));
        let mut fields = row.split(',').skip(5);
        let re: f64 = fields.next().unwrap().parse().unwrap();
        let im: f64 = fields.next().unwrap().parse().unwrap();
        assert!((re - want).abs() < 1e-12, "row {row}");
        assert!(im.abs() < 1e-12, "row {row}");
    }
    // k = 2 (ℓ = 1): diagonal −2.
    let row = text
        .lines()
        .find(|l| l.starts_with("SU(2),0,[2],0,0,"))
        .unwrap();
    let re: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!((re + 2.0).abs() < 1e-12, "row {row}");
}

#[test]
fn evolve_chains_like_a_semigroup_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "heat.json", HEAT_TORUS);

    let quarter = bin()
        .args(["evolve", "--t", "0.25", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(quarter.status.success(), "stderr: {}", stderr_str(&quarter));
    let again = bin()
        .args(["evolve", "--t", "0.25", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(quarter.stdout, again.stdout, "repeat runs must be identical");

    // Feed the quarter-step output back in as an inline function.
    let v = stdout_json(&quarter);
    let inline = serde_json::json!({
        "schema": "lieflow/1",
        "group": { "kind": "torus", "dim": 1 },
        "max_weight_norm": 8,
        "characteristics": { "a": [[0.5]] },
        "functions": [ v["functions"][0] ]
    });
    let cfg2 = write_cfg(dir.path(), "heat2.json", &inline.to_string());
    let chained = bin()
        .args(["evolve", "--t", "0.25", "--config"])
        .arg(&cfg2)
        .output()
        .unwrap();
    assert!(chained.status.success(), "stderr: {}", stderr_str(&chained));
    let direct = bin()
        .args(["evolve", "--t", "0.5", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(direct.status.success());

    let entry = |v: &serde_json::Value, weight: i64| -> f64 {
        let entries = v["functions"][0]["coefficients"]["entries"]
            .as_array()
            .unwrap();
        let e = entries
            .iter()
            .find(|e| e["weight"] == serde_json::json!([weight]))
            .unwrap();
        e["re"][0][0].as_f64().unwrap()
    };
    let cv = stdout_json(&chained);
    let dv = stdout_json(&direct);
    for w in [-1i64, 0, 1] {
        assert!(
            (entry(&cv, w) - entry(&dv, w)).abs() < 1e-12,
            "weight {w}: chained {} vs direct {}",
            entry(&cv, w),
            entry(&dv, w)
        );
    }
    // e^{t a} cos with a = 1/2, t = 1/2: coefficient e^{-1/4}/2 at ±1.
    let want = 0.5 * (-0.25f64).exp();
    assert!((entry(&dv, 1) - want).abs() < 1e-10);
}

#[test]
fn seed_env_var_matches_flag_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "sim.json",
        r#"{
  "schema": "lieflow/1",
  "group": { "kind": "torus", "dim": 1 },
  "max_weight_norm": 4,
  "characteristics": { "a": [[0.5]] },
  "functions": [ { "name": "cos_theta" } ]
}"#,
    );
    let sim = |env: Option<&str>, flag: Option<&str>| -> Output {
        let mut cmd = bin();
        cmd.args(["simulate", "--t", "0.1", "--steps", "20", "--paths", "200", "--config"])
            .arg(&cfg);
        if let Some(seed) = flag {
            cmd.args(["--seed", seed]);
        }
        match env {
            Some(value) => cmd.env("LIEFLOW_SEED", value),
            None => cmd.env_remove("LIEFLOW_SEED"),
        };
        cmd.output().unwrap()
    };
    let via_flag = sim(None, Some("42"));
    let via_env = sim(Some("42"), None);
    assert!(via_flag.status.success(), "stderr: {}", stderr_str(&via_flag));
    assert_eq!(via_flag.stdout, via_env.stdout);
    // Flag takes precedence over the environment.
    let flag_wins = sim(Some("7"), Some("42"));
    assert_eq!(flag_wins.stdout, via_flag.stdout);
    // Malformed env value is a config error.
    let bad = sim(Some("not-a-seed"), None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "pmp.json",
        r#"{
  "schema": "lieflow/1",
  "group": { "kind": "torus", "dim": 1 },
  "max_weight_norm": 6,
  "seed": 3,
  "characteristics": { "c": 0.1, "a": [[0.4]] },
  "functions": []
}"#,
    );
    let run = |threads: &str| -> Vec<u8> {
        let out = bin()
            .args([
                "verify-pmp",
                "--corpus-size",
                "30",
                "--threads",
                threads,
                "--config",
            ])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr_str(&out));
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn inline_function_weight_norm_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "inline.json",
        r#"{
  "schema": "lieflow/1",
  "group": { "kind": "torus", "dim": 1 },
  "max_weight_norm": 2,
  "functions": [ { "coefficients": {
    "group": { "kind": "torus", "dim": 1 },
    "max_norm": 5,
    "entries": [ { "weight": [5], "re": [[1.0]], "im": [[0.0]] } ]
  } } ]
}"#,
    );
    let out = bin().args(["decay", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(err.contains("max_weight_norm"), "stderr: {err}");
}

#[test]
fn output_files_match_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "heat.json", HEAT_TORUS);
    let path = dir.path().join("out.csv");
    let out = bin()
        .args(["decay", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let on_disk = std::fs::read(&path).unwrap();
    let to_stdout = bin().args(["decay", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(on_disk, to_stdout.stdout);
}
