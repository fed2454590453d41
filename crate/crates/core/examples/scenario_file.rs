//! Runs a scenario described in JSON and prints the sidecar metadata.

use vi_stab::sim::{simulate, Scenario};

const SCENARIO: &str = r#"{
    "params": {"v_nominal": 200, "droop_gain": 0.2, "inductance": 0.001, "capacitance": 0.014, "lpf_bandwidth": 125},
    "power_schedule": [{"time": 0, "power": 12000}],
    "t_end": 0.5,
    "decimation": 1000,
    "perturbation": {"amplitude": 500, "frequency": 50, "phase": 0}
}"#;

fn main() -> vi_stab::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SCENARIO.to_string(),
    };
    let s = Scenario::from_json(&text)?;
    let tr = simulate(&s)?;
    println!("{}", serde_json::to_string_pretty(&tr.meta(&s))?);
    Ok(())
}
