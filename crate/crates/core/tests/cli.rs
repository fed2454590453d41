use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use vi_stab::cli::run;

const REFERENCE: &str = r#"{"v_nominal": 200, "droop_gain": 0.2, "inductance": 0.001, "capacitance": 0.014, "power": 46000}"#;

fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("grid.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("vi-stab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vi-stab"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn thresholds_at_optimal_bandwidth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), REFERENCE);
    let (code, out, _) = call(&["thresholds", "--config", &cfg, "--omega", "716"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let c0 = v["c0"].as_f64().unwrap();
    assert!((c0 - 0.0116).abs() < 0.0001, "{c0}");
}

#[test]
fn overload_exits_with_no_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), REFERENCE);
    let o = binary(&["equilibrium", "--config", &cfg, "--power", "60000"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let o1 = binary(&["verify", "--samples", "10000", "--seed", "42"]);
    assert_eq!(
        o1.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o1.stderr)
    );
    let v: Value = serde_json::from_slice(&o1.stdout).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["agreement"]["routh_vs_eigen"], 0);
    assert_eq!(v["agreement"]["theorem_vs_routh"], 0);
    let o2 = binary(&["verify", "--samples", "10000", "--seed", "42"]);
    assert_eq!(o1.stdout, o2.stdout);
}

#[test]
fn flags_override_config_and_inf_selects_droop() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        r#"{"v_nominal": 200, "droop_gain": 0.2, "inductance": 0.001, "capacitance": 0.014, "lpf_bandwidth": "inf", "power": 40000}"#,
    );
    let (code, out, _) = call(&["stability", "--config", &cfg]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["eigs"].as_array().unwrap().len(), 2);
    assert_eq!(v["stable"], Value::Bool(true));

    let (code, out, _) = call(&["stability", "--config", &cfg, "--omega", "125"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["eigs"].as_array().unwrap().len(), 3);
    assert_eq!(v["stable"], Value::Bool(false));
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), REFERENCE);
    assert_eq!(
        binary(&["equilibrium", "--config", &cfg, "--droop-gain", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(binary(&["equilibrium", "--bogus"]).status.code(), Some(2));
    assert_eq!(binary(&[]).status.code(), Some(2));
    let bad = config(dir.path(), r#"{"v_nominal": 200, "unknown": 1}"#);
    assert_eq!(
        binary(&["equilibrium", "--config", &bad]).status.code(),
        Some(2)
    );
}

#[test]
fn collapse_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("collapse.json");
    fs::write(
        &scenario,
        r#"{
            "params": {"v_nominal": 200, "droop_gain": 0.2, "inductance": 0.001, "capacitance": 0.014, "lpf_bandwidth": 125},
            "power_schedule": [{"time": 0, "power": 40000}, {"time": 0.01, "power": 49900}],
            "t_end": 1.0
        }"#,
    )
    .unwrap();
    let out = dir.path().join("run.csv");
    let o = binary(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["verdict"], "VoltageCollapse");
}

#[test]
fn simulate_and_sweep_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("step.json");
    fs::write(
        &scenario,
        r#"{
            "params": {"v_nominal": 200, "droop_gain": 0.2, "inductance": 0.001, "capacitance": 0.014, "lpf_bandwidth": 716},
            "power_schedule": [{"time": 0, "power": 43000}, {"time": 0.02, "power": 45000}],
            "t_end": 0.05,
            "decimation": 100
        }"#,
    )
    .unwrap();
    let sc = scenario.to_str().unwrap();
    let (c1, a, _) = call(&["simulate", "--scenario", sc]);
    let (c2, b, _) = call(&["simulate", "--scenario", sc]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert!(a.starts_with("t,v_ref,i,v\n"));

    let cfg = config(dir.path(), REFERENCE);
    let sweep = |name: &str| {
        let path = dir.path().join(name);
        let (code, _, err) = call(&[
            "sweep",
            "--config",
            &cfg,
            "--omega",
            "716",
            "--axis1",
            "omega:log:10:100000:50",
            "--axis2",
            "capacitance:linear:0.005:0.06:40",
            "--cross-check",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        fs::read(&path).unwrap()
    };
    assert_eq!(sweep("a.csv"), sweep("b.csv"));
    assert!(dir.path().join("a.manifest.json").exists());
}

#[test]
fn critical_power_and_design_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), REFERENCE);
    let (code, out, _) = call(&["critical-power", "--config", &cfg, "--omega", "125"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let p = v["critical_power"].as_f64().unwrap();
    assert!((p - 17_371.8).abs() < 1.0, "{p}");

    let (code, out, _) = call(&["design", "--config", &cfg]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["omega_opt"].as_f64().unwrap() - 715.5).abs() < 0.5);
}
