//! Command-line front end.
//!
//! Grid parameters come from `--config <file.json>` and/or long flags; flags
//! win. Exit codes: 0 success, 1 verification failure or I/O error, 2 invalid
//! input, 3 no equilibrium, 4 voltage collapse.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::design::design_for;
use crate::error::{Error, Result};
use crate::model::{compute_equilibrium, power_transfer_limit, Bandwidth, GridParams};
use crate::sim::{critical_power, simulate, Scenario, Verdict};
use crate::stability::{analyze, capacitance_thresholds};
use crate::sweep::{
    curve_c0_vs_omega, stability_map, threads_from_env, write_curve_csv, Axis, AxisName, Manifest,
    SweepGrid,
};
use crate::verify::run_verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_EQUILIBRIUM: i32 = 3;
pub const EXIT_COLLAPSE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "vi-stab",
    version,
    about = "Stability analysis of virtual-inertia DC grids with constant power loads"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file with GridParams keys and an optional `power`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub v_nominal: Option<f64>,
    #[arg(long)]
    pub droop_gain: Option<f64>,
    #[arg(long)]
    pub inductance: Option<f64>,
    #[arg(long)]
    pub capacitance: Option<f64>,
    /// LPF bandwidth in rad/s, or `inf` for plain droop.
    #[arg(long)]
    pub omega: Option<Bandwidth>,
    /// CPL power in W.
    #[arg(long)]
    pub power: Option<f64>,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium point and power transfer limit.
    Equilibrium(Common),
    /// Routh verdict, thresholds and eigenvalues.
    Stability(Common),
    /// Capacitance thresholds C2, C1, C0-, C0.
    Thresholds(Common),
    /// Virtual-inertia sizing: c_base, omega_opt, c_opt, omega_max.
    Design(Common),
    /// Time-domain simulation of a scenario file.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Scenario JSON.
        #[arg(long)]
        scenario: PathBuf,
    },
    /// C0(omega) curve (one axis) or stability map (two axes).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// name:scale:min:max:n, e.g. omega:log:10:1e5:1000
        #[arg(long)]
        axis1: Axis,
        #[arg(long)]
        axis2: Option<Axis>,
        /// Add the eigenvalue-sign column to stability maps.
        #[arg(long)]
        cross_check: bool,
    },
    /// CPL power at which the capacitance stops satisfying C > C0.
    CriticalPower {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p_lo: Option<f64>,
        #[arg(long)]
        p_hi: Option<f64>,
    },
    /// Randomized agreement of the Routh, single-threshold and eigenvalue verdicts.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    v_nominal: Option<f64>,
    droop_gain: Option<f64>,
    inductance: Option<f64>,
    capacitance: Option<f64>,
    lpf_bandwidth: Option<Bandwidth>,
    power: Option<f64>,
}

struct Inputs {
    params: GridParams,
    power: Option<f64>,
}

fn missing(name: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value: f64::NAN,
        reason: "missing (set it in --config or by flag)",
    }
}

impl Common {
    fn config(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(path) => Ok(serde_json::from_str(&fs::read_to_string(path)?)?),
            None => Ok(ConfigFile::default()),
        }
    }

    /// Resolves parameters; those not needed by the subcommand get placeholders.
    fn inputs(&self, need_l: bool, need_c: bool, need_omega: bool) -> Result<Inputs> {
        let cfg = self.config()?;
        let v_nominal = self
            .v_nominal
            .or(cfg.v_nominal)
            .ok_or_else(|| missing("v_nominal"))?;
        let droop_gain = self
            .droop_gain
            .or(cfg.droop_gain)
            .ok_or_else(|| missing("droop_gain"))?;
        let inductance = self.inductance.or(cfg.inductance);
        let capacitance = self.capacitance.or(cfg.capacitance);
        let omega = self.omega.or(cfg.lpf_bandwidth);
        let params = GridParams {
            v_nominal,
            droop_gain,
            inductance: match inductance {
                Some(l) => l,
                None if need_l => return Err(missing("inductance")),
                None => 1.0,
            },
            capacitance: match capacitance {
                Some(c) => c,
                None if need_c => return Err(missing("capacitance")),
                None => 1.0,
            },
            lpf_bandwidth: match omega {
                Some(w) => w,
                None if need_omega => return Err(missing("lpf_bandwidth")),
                None => Bandwidth::Infinite,
            },
        };
        params.validate()?;
        Ok(Inputs {
            params,
            power: self.power.or(cfg.power),
        })
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn required_power(i: &Inputs) -> Result<f64> {
    i.power.ok_or_else(|| missing("power"))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body)?,
        None => out.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn human_lines<T: Serialize>(v: &T) -> Result<String> {
    let value = serde_json::to_value(v)?;
    let mut s = String::new();
    if let serde_json::Value::Object(map) = value {
        for (k, v) in map {
            s.push_str(&format!("{k:>16}: {v}\n"));
        }
    }
    Ok(s)
}

fn render<T: Serialize>(v: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => json(v),
        Format::Human => human_lines(v),
        Format::Csv => Err(Error::InvalidScenario(
            "csv output is only available for simulate and sweep".into(),
        )),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

#[derive(Serialize)]
struct EquilibriumOut {
    p_max: f64,
    equilibrium: crate::model::Equilibrium,
}

#[derive(Serialize)]
struct CriticalOut {
    critical_power: f64,
    p_max: f64,
    lpf_bandwidth: Bandwidth,
    capacitance: f64,
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Equilibrium(c) => {
            let i = c.inputs(false, false, false)?;
            let eq = compute_equilibrium(&i.params, required_power(&i)?)?;
            let body = render(
                &EquilibriumOut {
                    p_max: power_transfer_limit(&i.params)?,
                    equilibrium: eq,
                },
                c.format(Format::Json),
            )?;
            emit(out, c.output.as_deref(), &body)?;
        }
        Command::Stability(c) => {
            let i = c.inputs(true, true, true)?;
            let eq = compute_equilibrium(&i.params, required_power(&i)?)?;
            let body = render(&analyze(&i.params, &eq)?, c.format(Format::Json))?;
            emit(out, c.output.as_deref(), &body)?;
        }
        Command::Thresholds(c) => {
            let i = c.inputs(true, false, true)?;
            let eq = compute_equilibrium(&i.params, required_power(&i)?)?;
            let body = render(
                &capacitance_thresholds(&i.params, &eq)?,
                c.format(Format::Json),
            )?;
            emit(out, c.output.as_deref(), &body)?;
        }
        Command::Design(c) => {
            let i = c.inputs(true, false, false)?;
            let eq = compute_equilibrium(&i.params, required_power(&i)?)?;
            let d = design_for(&eq, i.params.inductance, i.params.droop_gain)?;
            emit(
                out,
                c.output.as_deref(),
                &render(&d, c.format(Format::Json))?,
            )?;
        }
        Command::Simulate { common, scenario } => {
            let mut s: Scenario = serde_json::from_str(&fs::read_to_string(scenario)?)?;
            let p = &mut s.params;
            if let Some(v) = common.v_nominal {
                p.v_nominal = v;
            }
            if let Some(v) = common.droop_gain {
                p.droop_gain = v;
            }
            if let Some(v) = common.inductance {
                p.inductance = v;
            }
            if let Some(v) = common.capacitance {
                p.capacitance = v;
            }
            if let Some(v) = common.omega {
                p.lpf_bandwidth = v;
            }
            let tr = simulate(&s)?;
            let meta = json(&tr.meta(&s))?;
            match common.format(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    tr.write_csv(&mut buf)?;
                    match &common.output {
                        Some(path) => {
                            fs::write(path, &buf)?;
                            fs::write(sibling(path, ".json"), &meta)?;
                        }
                        None => out.write_all(&buf)?,
                    }
                }
                Format::Json => emit(out, common.output.as_deref(), &meta)?,
                Format::Human => emit(out, common.output.as_deref(), &human_lines(&tr.meta(&s))?)?,
            }
            writeln!(err, "verdict: {:?}", tr.verdict)?;
            if tr.verdict == Verdict::VoltageCollapse {
                return Ok(EXIT_COLLAPSE);
            }
        }
        Command::Sweep {
            common,
            axis1,
            axis2,
            cross_check,
        } => {
            let on_axis =
                |name: AxisName| axis1.name == name || axis2.is_some_and(|a| a.name == name);
            let need_omega = !on_axis(AxisName::Omega);
            let need_c = axis2.is_some() && !on_axis(AxisName::Capacitance);
            let i = common.inputs(true, need_c, need_omega)?;
            let grid = SweepGrid {
                axis1: *axis1,
                axis2: *axis2,
                fixed: i.params,
                power: i.power.unwrap_or(0.0),
            };
            let (kind, rows, mut buf) = match axis2 {
                None => {
                    let rows = curve_c0_vs_omega(&grid)?;
                    let mut buf = Vec::new();
                    write_curve_csv(&rows, &mut buf)?;
                    ("c0_curve", rows.len(), buf)
                }
                Some(_) => {
                    let map = stability_map(&grid, *cross_check)?;
                    let mut buf = Vec::new();
                    map.write_csv(&mut buf)?;
                    if *cross_check && map.disagreements() > 0 {
                        writeln!(
                            err,
                            "eigenvalue cross-check disagreements: {}",
                            map.disagreements()
                        )?;
                    }
                    ("stability_map", map.cells.len(), buf)
                }
            };
            let manifest = json(&Manifest::new(kind, &grid, rows))?;
            match common.format(Format::Csv) {
                Format::Csv => {}
                Format::Json => buf = manifest.clone().into_bytes(),
                Format::Human => {
                    return Err(Error::InvalidGrid("sweep output is csv or json".into()))
                }
            }
            match &common.output {
                Some(path) => {
                    fs::write(path, &buf)?;
                    fs::write(sibling(path, ".manifest.json"), &manifest)?;
                }
                None => out.write_all(&buf)?,
            }
        }
        Command::CriticalPower { common, p_lo, p_hi } => {
            let i = common.inputs(true, true, true)?;
            let p_max = power_transfer_limit(&i.params)?;
            let lo = p_lo.unwrap_or(1e-9 * p_max);
            let hi = p_hi.unwrap_or(p_max);
            let pc = critical_power(&i.params, lo, hi)?;
            let body = render(
                &CriticalOut {
                    critical_power: pc,
                    p_max,
                    lpf_bandwidth: i.params.lpf_bandwidth,
                    capacitance: i.params.capacitance,
                },
                common.format(Format::Json),
            )?;
            emit(out, common.output.as_deref(), &body)?;
        }
        Command::Verify {
            samples,
            seed,
            output,
        } => {
            let report = run_verify(*samples, *seed)?;
            emit(out, output.as_deref(), &json(&report)?)?;
            if !report.passed {
                writeln!(err, "verification failed")?;
                return Ok(EXIT_FAILURE);
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoEquilibrium { .. } => EXIT_NO_EQUILIBRIUM,
        Error::VoltageCollapse { .. } => EXIT_COLLAPSE,
        Error::Io(_) | Error::Invariant(_) => EXIT_FAILURE,
        _ => EXIT_INVALID,
    }
}

/// Parses `argv` (including the program name), runs the command, and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    // The global pool can only be configured once per process; later calls keep it.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads_from_env())
        .build_global();
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
