use std::collections::BTreeMap;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fracyule"));
    c.env_remove("FRACYULE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn tmp(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fracyule-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn limit_pmf_csv_sums_to_one() {
    let o = run(&["limit-pmf", "--family", "s2", "--rho", "0.005", "--N", "200", "--n-max", "200"]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    assert_eq!(rows[0], ["n", "prob"]);
    assert_eq!(rows.len(), 201);
    let total: f64 = rows[1..].iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn json_envelope() {
    let o = run(&["pmf", "--nu", "0.6", "--t", "2", "--n-max", "5", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["schema"], "fracyule/1");
    assert_eq!(v["command"], "pmf");
    assert_eq!(v["config"]["nu"], "0.6");
    assert_eq!(v["config"]["t"], "2");
    assert!(!v["results"].is_null());
}

#[test]
fn config_file_and_flag_precedence() {
    let cfg = tmp("prec.conf", "# model\nnu = 0.5\nbeta = 2\nn_max = 4\n");
    let o = run(&["limit-pmf", "--config", cfg.to_str().unwrap(), "--nu", "0.7", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = &json(&o)["config"];
    assert_eq!(c["nu"], "0.7");
    assert_eq!(c["beta"], "2");
    assert_eq!(c["n-max"], "4");
}

#[test]
fn config_key_for_other_command_is_rejected() {
    let cfg = tmp("wrong.conf", "replicas = 10\n");
    let o = run(&["limit-pmf", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_from_environment_wins() {
    let base = ["simulate", "--t", "3", "--replicas", "500"];
    let with_env = bin().args(base).args(["--seed", "1"]).env("FRACYULE_SEED", "7").output().unwrap();
    let direct = run(&[&base[..], &["--seed", "7"]].concat());
    let other = run(&[&base[..], &["--seed", "1"]].concat());
    assert!(with_env.status.success());
    assert_eq!(with_env.stdout, direct.stdout);
    assert_ne!(with_env.stdout, other.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["pmf", "--nu", "1.5", "--t", "1"]).status.code(), Some(2));
    assert_eq!(run(&["pmf", "--nu", "abc", "--t", "1"]).status.code(), Some(2));
    assert_eq!(run(&["pmf", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["figure", "4"]).status.code(), Some(2));
    // an impossible TV bound forces a statistical failure
    let o = run(&["compare", "--t", "2", "--replicas", "1000", "--assert", "--max-tv", "0"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!o.stdout.is_empty());
}

#[test]
fn error_json_on_stderr() {
    let o = run(&["pmf", "--nu", "2", "--t", "1", "--error-json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(v.is_object());
    assert_eq!(v["schema"], "fracyule/1");
}

#[test]
fn output_file() {
    let p = std::env::temp_dir().join(format!("fracyule-out-{}.csv", std::process::id()));
    let o = run(&["mean", "--t", "1", "-o", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("t,mean,terms,last_term,method\n"));
    std::fs::remove_file(p).unwrap();
}

#[test]
fn compare_is_byte_identical_across_threads() {
    let args = ["compare", "--nu", "0.6", "--t", "4", "--replicas", "20000", "--seed", "3"];
    let a = bin().args(args).args(["--threads", "1"]).output().unwrap();
    let b = bin().args(args).args(["--threads", "3"]).output().unwrap();
    let c = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

fn series(o: &Output) -> BTreeMap<String, Vec<(f64, f64)>> {
    let rows = csv_rows(o);
    assert_eq!(rows[0], ["x", "y", "series"]);
    let mut m: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows[1..] {
        m.entry(r[2].clone()).or_default().push((r[0].parse().unwrap(), r[1].parse().unwrap()));
    }
    m
}

#[test]
fn figure1_panels_are_distributions() {
    let o = run(&["figure", "1"]);
    assert!(o.status.success());
    let s = series(&o);
    assert_eq!(s.len(), 6);
    for pts in s.values() {
        assert_eq!(pts.len(), 200);
        let total: f64 = pts.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn figure2_matches_closed_form() {
    let o = run(&["figure", "2"]);
    assert!(o.status.success());
    let s = series(&o);
    assert_eq!(s.len(), 3);
    for pts in s.values() {
        let cap = pts.len() as f64;
        for &(n, y) in pts {
            let want = (1.0 + 1.0 / cap) / (n * n + n);
            assert!((y - want).abs() < 1e-10);
        }
    }
    let p1 = run(&["figure", "2", "--panel", "1"]);
    let first = &csv_rows(&p1)[1];
    assert_eq!(first[0], "1");
    assert!((first[1].parse::<f64>().unwrap() - 0.505).abs() < 1e-12);
}

#[test]
fn figure3_curves() {
    let o = run(&["figure", "3", "--n-cap-max", "2000"]);
    assert!(o.status.success());
    let s = series(&o);
    assert_eq!(s.len(), 8 + 5 + 6);
    for pts in s.values() {
        assert!(pts.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(pts.iter().all(|p| (0.0..=1.0).contains(&p.1)));
        assert_eq!(pts.last().unwrap().0, 2000.0);
    }
    // steeper alpha sends the top state to zero faster
    let top = |a: &str| s[&format!("b: alpha={a}")].last().unwrap().1;
    assert!(top("1.2") < top("1") && top("1") < top("0.8"));
}

#[test]
fn validate_commands() {
    let o = run(&["validate", "--check", "caputo", "--nu", "0.6", "--rates", "1,2,3", "--n", "2", "--step", "1e-3", "--t-grid", "0.5,1,2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&o)[0], ["t", "residual"]);
    let o = run(&["validate", "--check", "laplace", "--nu", "0.6", "--z", "2", "--n", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = csv_rows(&o);
    assert!(r[1][5].parse::<f64>().unwrap() < 1e-6);
}
