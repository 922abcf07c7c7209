//! End-to-end checks of the `mcmc` binary: exit codes, output layout, and
//! byte-level determinism of every CSV under a fixed seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU64, Ordering};

static DIR_COUNTER: AtomicU64 = AtomicU64::new(0);

fn scratch_dir() -> PathBuf {
    let n = DIR_COUNTER.fetch_add(1, Ordering::SeqCst);
    let dir = std::env::temp_dir().join(format!(
        "mcmc-cli-test-{}-{n}",
        std::process::id()
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn base_config() -> String {
    r#"
[env]
D_Tx_m2_per_s = 1e-14
D_Rx_m2_per_s = 0.0
D_X_m2_per_s = 8e-11
a_Tx_m = 1e-7
a_Rx_m = 1e-6
r0_m = 1e-5

[channel_stats]
t_list_s = [36.0]
tau_grid_s = { start = 0.05, stop = 1.0, points = 5 }
dist_tau_s = 0.17
h_points = 4

[simulate]
t_s = 36.0
tau_grid_s = { start = 0.05, stop = 1.0, points = 5 }
step_s = 0.1
realizations = 1000
mode = "gaussian"

[drug]
window_s = 864.0
constraint_window_s = 864.0
releases = 20
constraints = 20
beta = 0.0
theta_per_s = 1.0

[drug_eval]
t_grid_s = { start = 100.0, stop = 800.0, points = 3 }
grid_resolution = 256

[link]
bits = 3
T_b_s = 10.0
eta = 1.0
budget = 1500.0
psi = 0.02
confidence = 0.8
horizon_s = 1000.0
frame_points = 4
"#
    .to_string()
}

fn write_config(dir: &Path, contents: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, contents).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path, seed: u64) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcmc"))
        .args([
            cmd,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            &seed.to_string(),
        ])
        .env("MCMC_THREADS", "1")
        .output()
        .unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map_or(false, |e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_str().unwrap().to_string(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn all_commands_rerun_byte_identical() {
    let dir = scratch_dir();
    let config = write_config(&dir, &base_config());
    for cmd in [
        "channel-stats",
        "simulate",
        "drug-design",
        "drug-eval",
        "mc-threshold",
        "mc-release",
        "mc-frame",
    ] {
        let out_a = dir.join(format!("{cmd}-a"));
        let out_b = dir.join(format!("{cmd}-b"));
        let ra = run(cmd, &config, &out_a, 7);
        let rb = run(cmd, &config, &out_b, 7);
        assert!(ra.status.success(), "{cmd}: {:?}", ra);
        assert!(rb.status.success(), "{cmd}: {:?}", rb);
        let fa = csv_files(&out_a);
        let fb = csv_files(&out_b);
        assert!(!fa.is_empty(), "{cmd} produced no CSV output");
        assert_eq!(fa, fb, "{cmd} reruns differ");
    }
}

#[test]
fn different_seeds_change_monte_carlo_output() {
    let dir = scratch_dir();
    let config = write_config(&dir, &base_config());
    let out_a = dir.join("seed0");
    let out_b = dir.join("seed1");
    assert!(run("simulate", &config, &out_a, 0).status.success());
    assert!(run("simulate", &config, &out_b, 1).status.success());
    assert_ne!(csv_files(&out_a), csv_files(&out_b));
}

#[test]
fn manifest_written_alongside_outputs() {
    let dir = scratch_dir();
    let config = write_config(&dir, &base_config());
    let out = dir.join("out");
    assert!(run("channel-stats", &config, &out, 3).status.success());
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["command"], "channel-stats");
    assert_eq!(v["seed"], 3);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = scratch_dir();
    let config = write_config(&dir, "this is not toml [");
    let out = dir.join("out");
    let r = run("channel-stats", &config, &out, 0);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists(), "failed run must not create outputs");
}

#[test]
fn empty_time_list_exits_2() {
    let dir = scratch_dir();
    let cfg = base_config().replace("t_list_s = [36.0]", "t_list_s = []");
    let config = write_config(&dir, &cfg);
    let out = dir.join("out");
    let r = run("channel-stats", &config, &out, 0);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_key_exits_2() {
    let dir = scratch_dir();
    let cfg = base_config().replace("r0_m = 1e-5", "r0_m = 1e-5\nr0_km = 1.0");
    let config = write_config(&dir, &cfg);
    let r = run("channel-stats", &config, &dir.join("out"), 0);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn infeasible_design_exits_3() {
    let dir = scratch_dir();
    // constraint instants far earlier than any release can reach
    let cfg = base_config().replace(
        "constraint_window_s = 864.0",
        "constraint_window_s = 1e-4",
    );
    let config = write_config(&dir, &cfg);
    let out = dir.join("out");
    let r = run("drug-design", &config, &out, 0);
    assert_eq!(r.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn single_point_tau_grid_gives_single_row() {
    let dir = scratch_dir();
    let cfg = base_config().replace(
        "tau_grid_s = { start = 0.05, stop = 1.0, points = 5 }\ndist_tau_s",
        "tau_grid_s = { start = 0.17, stop = 0.17, points = 1 }\ndist_tau_s",
    );
    let config = write_config(&dir, &cfg);
    let out = dir.join("out");
    assert!(run("channel-stats", &config, &out, 0).status.success());
    let moments = fs::read_to_string(out.join("moments.csv")).unwrap();
    let lines: Vec<&str> = moments.trim().lines().collect();
    assert_eq!(lines.len(), 2, "header plus one data row: {moments}");
    assert!(lines[0].starts_with("t_s,tau_s,"));
}

#[test]
fn zero_target_designs_zero_profile() {
    let dir = scratch_dir();
    let cfg = base_config().replace("theta_per_s = 1.0", "theta_per_s = 0.0");
    let config = write_config(&dir, &cfg);
    let out = dir.join("out");
    assert!(run("drug-design", &config, &out, 0).status.success());
    let profile = fs::read_to_string(out.join("release_profile.csv")).unwrap();
    for line in profile.trim().lines().skip(1) {
        let alpha: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(alpha, 0.0);
    }
}

#[test]
fn single_bit_release_takes_whole_budget() {
    let dir = scratch_dir();
    let cfg = base_config().replace("bits = 3", "bits = 1");
    let config = write_config(&dir, &cfg);
    let out = dir.join("out");
    assert!(run("mc-release", &config, &out, 0).status.success());
    let table = fs::read_to_string(out.join("bit_ber.csv")).unwrap();
    let lines: Vec<&str> = table.trim().lines().collect();
    assert_eq!(lines.len(), 2);
    let alpha: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(alpha, 1500.0);
}
