use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use obsharvest::config::{default_config, from_json_str, from_toml_str};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_obsharvest"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn model_lines() -> String {
    default_config()
        .to_toml()
        .lines()
        .filter(|l| l.starts_with("model."))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Small coarse-chain problem that solves in well under a second.
fn tiny_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        "{}\
         model.flood_threshold = 4\n\
         chain.source = \"synthetic\"\n\
         chain.preset = \"coarse\"\n\
         grid.N = 21\n\
         grid.dt = 0.005\n\
         grid.T = 10.0\n\
         {extra}",
        model_lines().replace("model.flood_threshold = 16\n", "")
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn default_config_round_trips_through_the_parser() {
    let out = run(&["default-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(from_toml_str(&text).unwrap(), default_config());
    let out = run(&["default-config", "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(from_json_str(&text).unwrap(), default_config());
}

#[test]
fn missing_lambda_hi_exits_2_with_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = default_config()
        .to_toml()
        .lines()
        .filter(|l| !l.starts_with("model.lambda_hi"))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, text).unwrap();
    let out = run(&["run", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.lambda_hi"));
}

#[test]
fn unstable_grid_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "mode = \"solve-flexible\"\n");
    fs::write(&cfg, fs::read_to_string(&cfg).unwrap().replace("grid.dt = 0.005", "grid.dt = 0.5")).unwrap();
    let out = run(&["run", "--config", s(&cfg), "--out", s(&dir.path().join("o")), "--quiet"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unstable"));
}

#[test]
fn oracle_check_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("o.toml");
    fs::write(
        &cfg,
        format!("mode = \"oracle-check\"\n{}oracle.preset = \"example\"\noracle.nodes = [101, 201]\noracle.check_nodes = 201\n", model_lines()),
    )
    .unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&["run", "--config", s(&cfg), "--out", s(&out_dir), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["oracle"]["within_tolerance"], true);
    assert!(manifest["oracle"]["errors"][1]["max_relative_error"].as_f64().unwrap() <= 0.02);
    assert!(fs::read_to_string(out_dir.join("oracle.csv")).unwrap().contains("N,dt,err_regime0"));
}

#[test]
fn penalty_sweep_writes_four_voi_tables_and_a_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(
        dir.path(),
        "mode = \"sweep\"\nsweep.axis = \"model.penalty\"\nsweep.values = [5.0, 50.0, 200.0, 500.0]\n",
    );
    let out_dir = dir.path().join("o");
    let out = run(&["run", "--config", s(&cfg), "--out", s(&out_dir), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for p in ["5", "50", "200", "500"] {
        assert!(out_dir.join(format!("voi_penalty_{p}.csv")).exists(), "P = {p}");
    }
    let curve = fs::read_to_string(out_dir.join("voi_regime0_penalty.csv")).unwrap();
    let header = curve.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "x,V_penalty_5,V_penalty_50,V_penalty_200,V_penalty_500");
    assert_eq!(curve.lines().filter(|l| !l.starts_with('#')).count(), 1 + 21);
}

#[test]
fn identical_runs_give_identical_tables_that_name_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(
        dir.path(),
        "mode = \"simulate\"\nseed = 9\nsim.paths = 200\nsim.starts = [[0, 0.4]]\nsim.event_log = 1\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for o in [&a, &b] {
        let out = run(&["run", "--config", s(&cfg), "--out", s(o), "--quiet"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap().to_string();
    assert!(manifest["wall_time_s"].as_f64().is_some());
    for name in ["estimate.csv", "events.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
        assert!(String::from_utf8(x).unwrap().contains(&format!("config_hash={hash}")));
    }
    let events = fs::read_to_string(a.join("events.csv")).unwrap();
    assert!(events.contains("path,t,kind,regime,X_before,X_after,z,lambda_next"));
    // a different seed changes the estimate
    let c = dir.path().join("c");
    run(&["run", "--config", s(&cfg), "--out", s(&c), "--quiet", "--seed", "10"]);
    assert_ne!(fs::read(a.join("estimate.csv")).unwrap(), fs::read(c.join("estimate.csv")).unwrap());
}

#[test]
fn estimated_chain_feeds_a_solve() {
    let dir = tempfile::tempdir().unwrap();
    let mut q = String::from("time,discharge\n");
    for k in 0..24 * 28 {
        let level = [0.5, 1.75, 3.0][(k / 5 + k / 7) % 3];
        let stamp = format!("2019-02-{:02}T{:02}:00:00Z", 1 + k / 24, k % 24);
        let v = if k % 97 == 3 { "NA".to_string() } else { level.to_string() };
        q.push_str(&format!("{stamp},{v}\n"));
    }
    fs::write(dir.path().join("q.csv"), q).unwrap();
    let est = dir.path().join("est.toml");
    fs::write(
        &est,
        format!(
            "mode = \"estimate-chain\"\n{}estimate.input = \"q.csv\"\nestimate.count = 3\nestimate.q0 = 0.5\nestimate.dq = 1.25\n",
            model_lines()
        ),
    )
    .unwrap();
    let out = run(&["estimate-chain", "--config", s(&est), "--out", s(&dir.path().join("e")), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("e/chain.txt.meta").exists());
    let solve = dir.path().join("solve.toml");
    fs::write(
        &solve,
        format!(
            "mode = \"solve-flexible\"\n{}chain.source = \"file\"\nchain.path = \"e/chain.txt\"\ngrid.N = 21\ngrid.dt = 0.005\ngrid.T = 5.0\n",
            model_lines().replace("model.flood_threshold = 16", "model.flood_threshold = 1")
        ),
    )
    .unwrap();
    let out = run(&["solve", "--config", s(&solve), "--out", s(&dir.path().join("s")), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("s/solution_flexible.csv")).unwrap();
    assert!(table.contains("i,x,Phi,Psi_lo,Psi_hi,zstar,lamstar"));
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 21);
}

#[test]
fn solve_inflexible_table_has_four_slots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "mode = \"voi\"\n");
    let out_dir = dir.path().join("o");
    let out = run(&["solve", "--inflexible", "--config", s(&cfg), "--out", s(&out_dir), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("solution_inflexible.csv")).unwrap();
    assert!(table.contains("i,x,Phi,Psi_lo_hold,Psi_lo_cut,Psi_hi_hold,Psi_hi_cut,zstar,lamstar"));
    assert!(!out_dir.join("voi.csv").exists());
}
