//! Nonlinear time-domain simulation of the grid under stepped CPL power.
//!
//! Integration is classic fixed-step RK4. Power steps are ideal
//! discontinuities aligned to the step grid; an optional sinusoidal ripple
//! is superimposed on the scheduled power.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    compute_equilibrium, power_transfer_limit, Bandwidth, Equilibrium, GridParams,
    MachineEmulationParams,
};
use crate::stability::theorem1_stable;

pub type State = [f64; 3];

pub const DEFAULT_DT: f64 = 1e-6;

/// Fraction of `V_n` below which the CPL model `P/v` is considered invalid.
pub const V_FLOOR_FRACTION: f64 = 0.05;

/// Derivative of `(v_ref, i, v)` under the LPF control law.
///
/// At `ω = ∞` the reference is algebraic (`v_ref = V_n − K i`) and its
/// derivative is `−K di/dt`, which keeps a consistent state on that manifold.
pub fn step_dynamics(state: State, power: f64, params: &GridParams) -> Result<State> {
    let [v_ref, i, v] = state;
    check_floor(v, params.v_nominal)?;
    let di = (v_ref - v) / params.inductance;
    let dv = (i - power / v) / params.capacitance;
    let dv_ref = match params.lpf_bandwidth {
        Bandwidth::Finite(w) => w * (params.v_nominal - v_ref) - w * params.droop_gain * i,
        Bandwidth::Infinite => -params.droop_gain * di,
    };
    Ok([dv_ref, di, dv])
}

/// Derivative under the machine-emulation law `C_v V_n v̇_ref = −D_b (v_ref − V_n) − i`.
pub fn step_dynamics_machine(
    state: State,
    power: f64,
    m: &MachineEmulationParams,
    inductance: f64,
    capacitance: f64,
) -> Result<State> {
    let [v_ref, i, v] = state;
    check_floor(v, m.v_nominal)?;
    let dv_ref =
        (-m.damping_factor * (v_ref - m.v_nominal) - i) / (m.virtual_inertia * m.v_nominal);
    Ok([
        dv_ref,
        (v_ref - v) / inductance,
        (i - power / v) / capacitance,
    ])
}

fn check_floor(v: f64, v_nominal: f64) -> Result<()> {
    if v <= V_FLOOR_FRACTION * v_nominal || !v.is_finite() {
        return Err(Error::VoltageCollapse {
            time: f64::NAN,
            voltage: v,
        });
    }
    Ok(())
}

/// One classic RK4 step of `ẋ = f(t, x)`.
pub fn rk4_step<const N: usize, F>(f: F, t: f64, x: &[f64; N], dt: f64) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let axpy = |a: &[f64; N], s: f64, k: &[f64; N]| -> [f64; N] {
        std::array::from_fn(|j| a[j] + s * k[j])
    };
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k1))?;
    let k3 = f(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k2))?;
    let k4 = f(t + dt, &axpy(x, dt, &k3))?;
    Ok(std::array::from_fn(|j| {
        x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerStep {
    pub time: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    AtEquilibrium,
    /// Explicit `(v_ref, i, v)`.
    Explicit(State),
}

/// Sinusoidal load ripple added to the scheduled power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ripple {
    /// Peak amplitude [W].
    pub amplitude: f64,
    /// [Hz].
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Numeric rules for the terminal verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerdictRules {
    /// Converged when the final-window deviation is below this (relative to `V_e`).
    pub converged_tol: f64,
    /// Diverged once `|v − V_e|` exceeds this fraction of `V_n`.
    pub diverged_fraction: f64,
    /// Oscillating when final-window peak-to-peak exceeds this fraction of `V_e`.
    pub oscillation_tol: f64,
    /// Collapse floor as a fraction of `V_n`.
    pub v_floor_fraction: f64,
}

impl Default for VerdictRules {
    fn default() -> Self {
        Self {
            converged_tol: 1e-3,
            diverged_fraction: 0.5,
            oscillation_tol: 1e-3,
            v_floor_fraction: V_FLOOR_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: GridParams,
    /// When set, the reference voltage follows the machine-emulation law and
    /// `params.droop_gain` / `params.lpf_bandwidth` are not used.
    #[serde(default)]
    pub machine: Option<MachineEmulationParams>,
    pub power_schedule: Vec<PowerStep>,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub initial_state: InitialState,
    /// Relative offset applied to the initial capacitor voltage.
    #[serde(default)]
    pub initial_perturbation: f64,
    #[serde(default)]
    pub perturbation: Option<Ripple>,
    /// Keep every n-th step in the output samples.
    #[serde(default = "default_decimation")]
    pub decimation: usize,
    #[serde(default)]
    pub rules: VerdictRules,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_decimation() -> usize {
    1
}

impl Scenario {
    /// Constant power from its equilibrium, no perturbation.
    pub fn hold(params: GridParams, power: f64, t_end: f64) -> Self {
        Self {
            params,
            machine: None,
            power_schedule: vec![PowerStep { time: 0.0, power }],
            t_end,
            dt: DEFAULT_DT,
            initial_state: InitialState::AtEquilibrium,
            initial_perturbation: 0.0,
            perturbation: None,
            decimation: 1,
            rules: VerdictRules::default(),
        }
    }

    /// `p0` from its equilibrium, stepping to `p1` at `t_step`.
    pub fn step(params: GridParams, p0: f64, p1: f64, t_step: f64, t_end: f64) -> Self {
        let mut s = Self::hold(params, p0, t_end);
        s.power_schedule.push(PowerStep {
            time: t_step,
            power: p1,
        });
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Self = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    /// Grid parameters as seen by the equilibrium: with machine emulation the
    /// droop gain is `1/D_b` and the bandwidth its LPF equivalent.
    pub fn effective_params(&self) -> Result<GridParams> {
        match &self.machine {
            None => Ok(self.params),
            Some(m) => {
                let (w, k) = crate::model::equivalent_lpf(m)?;
                Ok(GridParams {
                    droop_gain: k,
                    lpf_bandwidth: Bandwidth::Finite(w),
                    ..self.params
                })
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if let Some(m) = &self.machine {
            m.validate()?;
            if m.v_nominal != self.params.v_nominal {
                return bad("machine.v_nominal must equal params.v_nominal".into());
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.decimation == 0 {
            return bad("decimation must be at least 1".into());
        }
        let Some(first) = self.power_schedule.first() else {
            return bad("power_schedule is empty".into());
        };
        if first.time != 0.0 {
            return bad("power_schedule must start at t = 0".into());
        }
        if self
            .power_schedule
            .windows(2)
            .any(|w| w[1].time <= w[0].time)
        {
            return bad("power_schedule times must be strictly increasing".into());
        }
        if self
            .power_schedule
            .iter()
            .any(|s| !(s.power.is_finite() && s.power >= 0.0))
        {
            return bad("scheduled power must be non-negative".into());
        }
        if let Some(r) = &self.perturbation {
            if !(r.amplitude.is_finite() && r.frequency.is_finite() && r.frequency >= 0.0) {
                return bad("perturbation amplitude and frequency must be finite".into());
            }
        }
        Ok(())
    }

    fn derivative(&self, state: State, power: f64) -> Result<State> {
        match &self.machine {
            None => step_dynamics(state, power, &self.params),
            Some(m) => step_dynamics_machine(
                state,
                power,
                m,
                self.params.inductance,
                self.params.capacitance,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConvergedToEquilibrium,
    SustainedOscillation,
    Diverged,
    VoltageCollapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub v_ref: f64,
    pub i: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
    /// `max |v − V_e| / V_e` over the last 10 % of the run; `NaN` when the run
    /// ended early or the final power has no equilibrium.
    pub final_deviation: f64,
    /// Peak-to-peak of `v` over the last 10 % of the run.
    pub final_peak_to_peak: f64,
    /// Equilibrium voltage of the last scheduled power, if it exists.
    pub final_equilibrium: Option<f64>,
    pub dt: f64,
    pub decimation: usize,
    /// Time at which the run stopped (`t_end` unless it ended early).
    pub t_stop: f64,
}

/// JSON sidecar accompanying the CSV output.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta<'a> {
    pub verdict: Verdict,
    pub final_deviation: Option<f64>,
    pub final_peak_to_peak: f64,
    pub final_equilibrium: Option<f64>,
    pub dt: f64,
    pub decimation: usize,
    pub t_stop: f64,
    pub n_samples: usize,
    pub perturbation: Option<&'a Ripple>,
    pub initial_perturbation: f64,
    pub version: &'static str,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,v_ref,i,v")?;
        for s in &self.samples {
            writeln!(w, "{:.8e},{:.8e},{:.8e},{:.8e}", s.t, s.v_ref, s.i, s.v)?;
        }
        Ok(())
    }

    pub fn meta<'a>(&self, scenario: &'a Scenario) -> TrajectoryMeta<'a> {
        TrajectoryMeta {
            verdict: self.verdict,
            final_deviation: self
                .final_deviation
                .is_finite()
                .then_some(self.final_deviation),
            final_peak_to_peak: self.final_peak_to_peak,
            final_equilibrium: self.final_equilibrium,
            dt: self.dt,
            decimation: self.decimation,
            t_stop: self.t_stop,
            n_samples: self.samples.len(),
            perturbation: scenario.perturbation.as_ref(),
            initial_perturbation: scenario.initial_perturbation,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

pub fn simulate(s: &Scenario) -> Result<Trajectory> {
    s.validate()?;
    let eff = s.effective_params()?;
    let vn = eff.v_nominal;
    let v_floor = s.rules.v_floor_fraction * vn;

    let mut state = match s.initial_state {
        InitialState::AtEquilibrium => {
            compute_equilibrium(&eff, s.power_schedule[0].power)?.state()
        }
        InitialState::Explicit(x) => x,
    };
    state[2] *= 1.0 + s.initial_perturbation;

    let n_steps = (s.t_end / s.dt).round().max(1.0) as usize;
    let step_index: Vec<usize> = s
        .power_schedule
        .iter()
        .map(|p| (p.time / s.dt).round() as usize)
        .collect();
    let equilibria: Vec<Option<Equilibrium>> = s
        .power_schedule
        .iter()
        .map(|p| compute_equilibrium(&eff, p.power).ok())
        .collect();
    let final_eq = equilibria.last().copied().flatten().map(|e| e.v_cap);
    let window_start = n_steps - n_steps / 10;

    let mut samples = Vec::with_capacity(n_steps / s.decimation + 2);
    let push = |samples: &mut Vec<Sample>, t: f64, x: &State| {
        samples.push(Sample {
            t,
            v_ref: x[0],
            i: x[1],
            v: x[2],
        })
    };
    push(&mut samples, 0.0, &state);

    let mut segment = 0;
    let mut max_dev = 0.0f64;
    let (mut v_lo, mut v_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut early: Option<(Verdict, f64)> = None;

    for k in 0..n_steps {
        while segment + 1 < step_index.len() && step_index[segment + 1] <= k {
            segment += 1;
        }
        let base_power = s.power_schedule[segment].power;
        let t = k as f64 * s.dt;
        let load = |tt: f64| match &s.perturbation {
            Some(r) => base_power + r.amplitude * (2.0 * PI * r.frequency * tt + r.phase).sin(),
            None => base_power,
        };
        let f = |tt: f64, x: &State| {
            if x[2] <= v_floor {
                return Err(Error::VoltageCollapse {
                    time: tt,
                    voltage: x[2],
                });
            }
            s.derivative(*x, load(tt))
        };
        match rk4_step(f, t, &state, s.dt) {
            Ok(next) => state = next,
            Err(Error::VoltageCollapse { .. }) => {
                early = Some((Verdict::VoltageCollapse, t));
                break;
            }
            Err(e) => return Err(e),
        }
        let t_next = (k + 1) as f64 * s.dt;
        if (k + 1) % s.decimation == 0 {
            push(&mut samples, t_next, &state);
        }
        if !state.iter().all(|x| x.is_finite()) {
            early = Some((Verdict::Diverged, t_next));
            break;
        }
        if state[2] <= v_floor {
            early = Some((Verdict::VoltageCollapse, t_next));
            break;
        }
        if let Some(eq) = equilibria[segment] {
            if (state[2] - eq.v_cap).abs() > s.rules.diverged_fraction * vn {
                early = Some((Verdict::Diverged, t_next));
                break;
            }
        }
        if k + 1 >= window_start {
            v_lo = v_lo.min(state[2]);
            v_hi = v_hi.max(state[2]);
            if let Some(ve) = final_eq {
                max_dev = max_dev.max((state[2] - ve).abs() / ve);
            }
        }
    }

    if let Some((verdict, t_stop)) = early {
        if samples.last().map(|x| x.t) != Some(t_stop) {
            push(&mut samples, t_stop, &state);
        }
        return Ok(Trajectory {
            samples,
            verdict,
            final_deviation: f64::NAN,
            final_peak_to_peak: f64::NAN,
            final_equilibrium: final_eq,
            dt: s.dt,
            decimation: s.decimation,
            t_stop,
        });
    }

    let peak_to_peak = v_hi - v_lo;
    let (final_deviation, verdict) = match final_eq {
        Some(ve) => {
            let verdict = if max_dev < s.rules.converged_tol {
                Verdict::ConvergedToEquilibrium
            } else if peak_to_peak > s.rules.oscillation_tol * ve {
                Verdict::SustainedOscillation
            } else {
                Verdict::Diverged
            };
            (max_dev, verdict)
        }
        None => (f64::NAN, Verdict::Diverged),
    };
    Ok(Trajectory {
        samples,
        verdict,
        final_deviation,
        final_peak_to_peak: peak_to_peak,
        final_equilibrium: final_eq,
        dt: s.dt,
        decimation: s.decimation,
        t_stop: n_steps as f64 * s.dt,
    })
}

/// Power at which `C = C₀(ω, R_e(P))`, by bisection on [`theorem1_stable`].
///
/// Loads above the transfer limit count as unstable, so `p_hi` may exceed it.
/// The returned value is within 1 W of the boundary.
pub fn critical_power(params: &GridParams, p_lo: f64, p_hi: f64) -> Result<f64> {
    params.validate()?;
    let stable_at = |power: f64| -> Result<bool> {
        match compute_equilibrium(params, power) {
            Ok(eq) => theorem1_stable(params, &eq),
            Err(Error::NoEquilibrium { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !(p_lo > 0.0 && p_lo < p_hi) || !stable_at(p_lo)? || stable_at(p_hi)? {
        return Err(Error::InvalidBracket { p_lo, p_hi });
    }
    let (mut lo, mut hi) = (p_lo, p_hi);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if stable_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [`critical_power`] over `(1e-9·P_max, P_max]`.
pub fn critical_power_default(params: &GridParams) -> Result<f64> {
    let p_max = power_transfer_limit(params)?;
    critical_power(params, 1e-9 * p_max, p_max)
}
