use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use tensornet_cli::run::{read_record, read_table};

fn tnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tnet")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn ed_writes_record_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "ed.json", r#"{"command":"ed","model":{"model":"heisenberg","n":4,"j":-1}}"#);
    let out = dir.path().join("ed_out.json");
    let o = tnet(&["run", "--config", &cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec = read_record(&out).unwrap();
    let e0 = rec.metrics["e0"].as_f64().unwrap();
    assert!((e0 + (3.0 + 2.0 * 3f64.sqrt()) / 4.0).abs() < 1e-12);
    assert!(rec.metrics.contains_key("gap"));
    assert_eq!(rec.version, env!("CARGO_PKG_VERSION"));
    // no stray temporary files next to the output
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn output_dash_streams_json() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"model":{"model":"ising_nn","n":5,"j":1,"h":0.5}}"#);
    let o = tnet(&["ed", "--config", &cfg, "--output", "-"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "ed");
    assert_eq!(v["config"]["algorithm"]["chi_max"], 16);
}

#[test]
fn trg_csv_is_readable_and_monotone() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "trg.json",
        r#"{"command":"trg","algorithm":{"betas":[0.2,0.4,0.6],"steps":6,"chi_max":8},"output":{"format":"csv"}}"#,
    );
    let out = dir.path().join("grid.csv");
    let o = tnet(&["trg", "--config", &cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&out).unwrap();
    assert_eq!(t.columns, ["beta", "f", "ln_z_per_site", "steps", "chi"]);
    let ln_z = t.column("ln_z_per_site").unwrap();
    assert!(ln_z.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn same_seed_same_metrics() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "tebd.json",
        r#"{"command":"tebd","model":{"model":"ising_nn","n":8,"j":1,"h":0.8},
            "algorithm":{"chi_max":8,"tau_schedule":[0.1,0.02],"max_sweeps":200},"seed":5}"#,
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        assert_eq!(code(&tnet(&["run", "--config", &cfg, "--output", out.to_str().unwrap()])), 0);
        read_record(&out).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!((a.config.model, &a.config.algorithm, a.config.seed), (b.config.model, &b.config.algorithm, b.config.seed));
    let ea = a.metrics["final_energy"].as_f64().unwrap();
    let eb = b.metrics["final_energy"].as_f64().unwrap();
    assert!((ea - eb).abs() < 1e-9);
    assert_eq!(a.metrics["sweeps"], b.metrics["sweeps"]);
    let ta: Vec<f64> = serde_json::from_value(a.metrics["energy_trace"].clone()).unwrap();
    let tb: Vec<f64> = serde_json::from_value(b.metrics["energy_trace"].clone()).unwrap();
    assert!(ta.iter().zip(&tb).all(|(x, y)| (x - y).abs() < 1e-9));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "t.json", r#"{"model":{"model":"heisenberg","n":4,"j":1},"algorithm":{"max_sweeps":3},"seed":1}"#);
    let o = tnet(&["tebd", "--config", &cfg, "--seed", "99", "--output", "-"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 99);
}

#[test]
fn zero_sweeps_exits_cleanly_with_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"command":"tebd","model":{"model":"heisenberg","n":6,"j":-1},"algorithm":{"max_sweeps":0}}"#,
    );
    let o = tnet(&["run", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metrics"]["converged"], false);
}

#[test]
fn tebd_csv_trace_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"model":{"model":"heisenberg","n":6,"j":-1},"algorithm":{"max_sweeps":20,"tau_schedule":[0.1]},
            "output":{"format":"csv"}}"#,
    );
    let out = dir.path().join("trace.csv");
    assert_eq!(code(&tnet(&["tebd", "--config", &cfg, "--output", out.to_str().unwrap()])), 0);
    let t = read_table(&out).unwrap();
    assert_eq!(t.columns, ["sweep", "tau", "energy", "discarded_weight", "norm"]);
    assert!(!t.rows.is_empty());
}

#[test]
fn mps_info_and_corr_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "m.json", r#"{"model":{"model":"heisenberg","n":8,"j":-1},"algorithm":{"chi_max":4}}"#);
    let o = tnet(&["mps-info", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let fidelity = v["metrics"]["fidelity"].as_f64().unwrap();
    assert!(fidelity > 0.9 && fidelity <= 1.0 + 1e-12);
    assert!(v["metrics"]["bond_dims"].as_array().unwrap().iter().all(|d| d.as_u64().unwrap() <= 4));

    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model":{"model":"ising_nn","n":20,"j":1,"h":1},"algorithm":{"chi_max":8,"tau_schedule":[0.1,0.01],"max_distance":8}}"#,
    );
    let o = tnet(&["corr", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metrics"]["range"], "finite");
    assert!(v["metrics"]["xi"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    // usage
    assert_eq!(code(&tnet(&["frobnicate"])), 1);
    assert_eq!(code(&tnet(&["verify", "nonsense"])), 1);
    assert_eq!(code(&tnet(&["run"])), 1);
    assert_eq!(code(&tnet(&["ed", "--config", "/nonexistent/cfg.json"])), 1);
    // validation
    let bad = write(dir.path(), "bad.json", r#"{"command":"ed","model":{"model":"heisenberg","n":-4,"j":-1}}"#);
    let o = tnet(&["run", "--config", &bad]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.n"));
    let syntax = write(dir.path(), "syntax.json", "{ \"command\": ");
    assert_eq!(code(&tnet(&["run", "--config", &syntax])), 2);
    let unknown = write(dir.path(), "unknown.json", r#"{"command":"trg","colour":"blue"}"#);
    assert_eq!(code(&tnet(&["run", "--config", &unknown])), 2);
    // numerical
    let lanczos = write(
        dir.path(),
        "lz.json",
        r#"{"command":"ed","model":{"model":"heisenberg","n":13,"j":1},"algorithm":{"lanczos_iters":2,"lanczos_tol":1e-14}}"#,
    );
    assert_eq!(code(&tnet(&["run", "--config", &lanczos])), 3);
    // resource
    let huge = write(dir.path(), "huge.json", r#"{"command":"ed","model":{"model":"heisenberg","n":30,"j":1}}"#);
    assert_eq!(code(&tnet(&["run", "--config", &huge])), 4);
    let unwritable = write(dir.path(), "ok.json", r#"{"command":"ed","model":{"model":"heisenberg","n":3,"j":1}}"#);
    assert_eq!(code(&tnet(&["run", "--config", &unwritable, "--output", "/nonexistent/dir/out.json"])), 4);
}

#[test]
fn verify_core_reports_each_criterion() {
    let o = tnet(&["verify", "core", "--output", "-"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<u64> = v["metrics"]["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [2, 3, 10, 11]);
    assert_eq!(v["metrics"]["all_passed"], true);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("[PASS]")).count(), 4);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&tnet(&["--help"])), 0);
}
