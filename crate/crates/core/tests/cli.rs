use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use underlay_relay::experiment::*;

const BIN: &str = env!("CARGO_BIN_EXE_relaysim");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fig(name: &str) -> Value {
    let text = std::fs::read_to_string(configs_dir().join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn write(dir: &tempfile::TempDir, v: &Value) -> PathBuf {
    let p = dir.path().join("cfg.json");
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn relaysim(cfg: &Path, extra: &[&str]) -> Output {
    Command::new(BIN).arg("--config").arg(cfg).args(extra).output().unwrap()
}

fn minimal() -> Value {
    json!({
        "users": 2, "relays": 3, "m": 2, "gamma_th_db": 5.0, "mode": "outage",
        "sweep": {"variable": "lambda_all", "start_db": 0.0, "stop_db": 20.0, "step_db": 5.0},
        "trials": 2000, "seed": 11
    })
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn shipped_configs_load() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let p = entry.unwrap().path();
        let cfg = load_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(cfg.trials >= 100_000);
    }
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, &minimal());
    let out = relaysim(&p, &["--dump-config"]);
    assert!(out.status.success());
    let echoed = ExperimentConfig::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(echoed, load_config(&p).unwrap());
    assert_eq!(echoed.omega_h1, 1.0);
    assert_eq!(echoed.scheme, underlay_relay::Scheme::MaxMin);
    // Command-line overrides are reflected in the dump.
    let out = relaysim(&p, &["--dump-config", "--trials", "5000", "--seed", "9", "--mode", "pk"]);
    let echoed = ExperimentConfig::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!((echoed.trials, echoed.seed, echoed.mode), (5000, 9, Mode::Pk));
}

#[test]
fn more_users_than_relays_rejected() {
    let mut v = minimal();
    v["users"] = json!(4);
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("N must be ≥ M"), "{err}");
    let dir = tempfile::tempdir().unwrap();
    let out = relaysim(&write(&dir, &v), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N must be ≥ M"));
}

#[test]
fn csi_requires_rayleigh() {
    let mut v = minimal();
    v["csi"] = json!({"e1": 0.05, "e2": 0.05, "e3": 0.05});
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("csi"), "{err}");
    v["m"] = json!(1);
    assert!(ExperimentConfig::from_json(&v.to_string()).is_ok());
    v["csi"]["e2"] = json!(1.5);
    assert!(ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string().contains("csi.e2"));
}

#[test]
fn negative_gain_rejected_before_validation() {
    let mut v = minimal();
    v["omega_h2"] = json!(-1.0);
    v["mode"] = json!("validate");
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("omega_h2"), "{err}");
    let dir = tempfile::tempdir().unwrap();
    let out = relaysim(&write(&dir, &v), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_key_named() {
    let mut v = minimal();
    v["lambda_db"] = json!(3.0);
    let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("lambda_db"), "{err}");
    let mut v = minimal();
    v["sweep"]["stride"] = json!(1.0);
    assert!(ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string().contains("stride"));
}

#[test]
fn bad_sweeps_and_trials_rejected() {
    for (path, val) in [
        ("step_db", json!(0.0)),
        ("step_db", json!(-1.0)),
        ("stop_db", json!(-5.0)),
    ] {
        let mut v = minimal();
        v["sweep"][path] = val;
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err(), "{path}");
    }
    let mut v = minimal();
    v["trials"] = json!(10);
    assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    let mut v = minimal();
    v["sweep"]["variable"] = json!("lambda2");
    assert!(ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string().contains("lambda1_db"));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(relaysim(&dir.path().join("missing.json"), &[]).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(relaysim(&dir.path().join("bad.json"), &[]).status.code(), Some(1));
}

#[test]
fn csv_format_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, &minimal());
    let a = relaysim(&p, &[]);
    let b = relaysim(&p, &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    assert_eq!(
        text.lines().next().unwrap(),
        "sweep_db,user,outage_exact,outage_asym1,outage_asym2,outage_mc,mc_ci_low,mc_ci_high,throughput_exact,throughput_mc"
    );
    let r = rows(&text);
    assert_eq!(r.len(), 5 * 2);
    for row in &r {
        assert_eq!(row.len(), 10);
        assert!(row[4].is_empty() && row[8].is_empty() && row[9].is_empty());
        let (lo, mean, hi) = (num(&row[6]), num(&row[5]), num(&row[7]));
        assert!(lo <= mean && mean <= hi);
    }
    let c = relaysim(&p, &["--seed", "12"]);
    assert_ne!(c.stdout, text.as_bytes());
}

#[test]
fn output_path_written() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, &minimal());
    let dest = dir.path().join("nested/out.csv");
    let out = relaysim(&p, &["--output", dest.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let stdout_run = relaysim(&p, &[]);
    assert_eq!(std::fs::read(&dest).unwrap(), stdout_run.stdout);
}

#[test]
fn fig1_recipe_rows() {
    let mut v = fig("fig1");
    v["trials"] = json!(20_000);
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    let r = sweep_rows(&cfg, Mode::Outage).unwrap();
    assert_eq!(r.len(), 9 * 2);
    for pair in r.chunks(2) {
        let (a, b) = (pair[0].outage_exact.unwrap(), pair[1].outage_exact.unwrap());
        assert!((a - b).abs() <= 1e-12);
        assert_eq!((pair[0].user, pair[1].user), (1, 2));
        for row in pair {
            let (lo, hi) = (row.mc_ci_low.unwrap(), row.mc_ci_high.unwrap());
            let slack = 2.0 * (hi - lo);
            assert!(a >= lo - slack && a <= hi + slack, "{} dB: {a} vs [{lo}, {hi}]", row.sweep_db);
            assert!(row.outage_asym1.is_some());
        }
    }
}

#[test]
fn fig2_floor_column_constant() {
    let mut v = fig("fig2");
    v["trials"] = json!(0);
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    let r = sweep_rows(&cfg, Mode::Outage).unwrap();
    let floor = r[0].outage_asym2.unwrap();
    for row in &r {
        assert_eq!(row.outage_asym2, Some(floor));
        assert!(row.outage_exact.unwrap() >= floor);
        assert!(row.outage_mc.is_none());
    }
    let last = r.last().unwrap().outage_exact.unwrap();
    assert!((last - floor) / floor < 1e-3);
}

#[test]
fn fig3_simulation_flattens_at_the_floor() {
    let mut v = fig("fig3");
    v["sweep"]["start_db"] = json!(35.0);
    v["trials"] = json!(200_000);
    v["pk_trials"] = json!(200_000);
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    let r = sweep_rows(&cfg, Mode::Outage).unwrap();
    let floor = r[0].outage_asym2.unwrap();
    let mut pooled = (0.0, 0usize);
    for row in &r {
        let est = row.outage_mc.unwrap();
        pooled.0 += est;
        pooled.1 += 1;
        assert!(est > 0.5 * floor && est < 2.0 * floor);
    }
    // Pooled over 3 users and 4 points the mean pins the floor to a few percent.
    let mean = pooled.0 / pooled.1 as f64;
    let se = (floor / (200_000.0 * pooled.1 as f64)).sqrt();
    assert!((mean - floor).abs() < 4.0 * se + 0.01 * floor, "{mean} vs {floor}");
}

#[test]
fn throughput_mode_columns() {
    let mut v = fig("fig4");
    v["trials"] = json!(0);
    v["sweep"]["stop_db"] = json!(10.0);
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    for row in sweep_rows(&cfg, Mode::Throughput).unwrap() {
        assert!(row.outage_exact.is_none() && row.outage_mc.is_none());
        assert!(row.throughput_exact.unwrap() > 0.0);
    }
}

#[test]
fn pk_mode_output() {
    let mut v = minimal();
    v["mode"] = json!("pk");
    let dir = tempfile::tempdir().unwrap();
    let out = relaysim(&write(&dir, &v), &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "user,k,probability");
    let mut sums = [0.0f64; 2];
    for row in rows(&text) {
        sums[row[0].parse::<usize>().unwrap() - 1] += num(&row[2]);
    }
    for s in sums {
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn validate_passes_for_fig1() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = fig("fig1");
    v["mode"] = json!("validate");
    v["trials"] = json!(20_000);
    let out = relaysim(&write(&dir, &v), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
    assert!(text.contains("diversity order (user 1)"));
    assert!(text.contains("array gain at 60 dB"));
}

#[test]
fn tiny_trials_inconclusive_not_failed() {
    let mut v = fig("fig1");
    v["mode"] = json!("validate");
    v["trials"] = json!(1_000);
    let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
    let rep = run_validate(&cfg).unwrap();
    assert!(rep.passed());
    let mc: Vec<&Check> = rep.checks.iter().filter(|c| c.name.contains("simulat")).collect();
    assert!(!mc.is_empty());
    assert!(mc.iter().all(|c| c.verdict == Verdict::Inconclusive));
    assert!(rep.to_string().contains("CI too wide"));
}

#[test]
fn failed_check_exits_three() {
    // Far from the asymptote the fitted slope is nowhere near -mN.
    let mut v = minimal();
    v["mode"] = json!("validate");
    v["trials"] = json!(0);
    v["sweep"] = json!({"variable": "lambda_all", "start_db": 0.0, "stop_db": 6.0, "step_db": 3.0});
    let dir = tempfile::tempdir().unwrap();
    let out = relaysim(&write(&dir, &v), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(3), "{text}");
    assert!(text.contains("FAIL"));
}
