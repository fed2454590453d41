//! Physical parameterization of the single-source DC grid.
//!
//! A source converter with droop control and a first-order low-pass filter
//! (the virtual inertia) feeds a constant power load through a series
//! inductor `L`, with the DC bus capacitor `C` in parallel with the load.
//!
//! ```text
//! v̇_ref = ω (V_n − v_ref) − ω K i
//! L i̇   = v_ref − v
//! C v̇   = i − P / v
//! ```
//!
//! The machine-emulation form `C_v V_n v̇_ref = −D_b (v_ref − V_n) − i` is the
//! same dynamic under `ω = D_b / (C_v V_n)`, `K = 1 / D_b`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{positive, Error, Result};

/// Relative tolerance used by invariant checks unless the caller supplies one.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// CPL power of the 200 V reference test system, in watts.
pub const REFERENCE_POWER: f64 = 46_000.0;

/// LPF bandwidth of the virtual-inertia filter.
///
/// `Infinite` is plain droop control (no filter, no inertia). Every formula
/// that consumes a bandwidth documents its `ω → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Finite(f64),
    Infinite,
}

impl Bandwidth {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bandwidth::Finite(w) => Some(w),
            Bandwidth::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Bandwidth::Infinite)
    }

    /// Maps `f64::INFINITY` onto [`Bandwidth::Infinite`].
    pub fn from_f64(w: f64) -> Self {
        if w == f64::INFINITY {
            Bandwidth::Infinite
        } else {
            Bandwidth::Finite(w)
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Finite(w) => write!(f, "{w}"),
            Bandwidth::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Bandwidth::Infinite),
            other => other
                .parse::<f64>()
                .map(Bandwidth::from_f64)
                .map_err(|e| format!("invalid bandwidth `{s}`: {e}")),
        }
    }
}

impl Serialize for Bandwidth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_inf::serialize(&self.as_f64(), s)
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        serde_inf::deserialize(d).map(Bandwidth::from_f64)
    }
}

/// Serde adapter for `f64` fields that may be `+∞`, written as the string `"inf"`.
pub mod serde_inf {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Num(f64),
        Str(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Num(v) => Ok(v),
            NumOrStr::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "+inf") => {
                Ok(f64::INFINITY)
            }
            NumOrStr::Str(s) => Err(de::Error::custom(format!(
                "expected a number or \"inf\", got `{s}`"
            ))),
        }
    }
}

/// Physical and control constants of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    /// Nominal voltage `V_n` [V].
    pub v_nominal: f64,
    /// Droop gain `K` [Ω].
    pub droop_gain: f64,
    /// Series inductance `L` [H].
    pub inductance: f64,
    /// DC bus capacitance `C` [F].
    pub capacitance: f64,
    /// Virtual-inertia LPF bandwidth `ω` [rad/s].
    pub lpf_bandwidth: Bandwidth,
}

impl GridParams {
    pub fn new(
        v_nominal: f64,
        droop_gain: f64,
        inductance: f64,
        capacitance: f64,
        lpf_bandwidth: Bandwidth,
    ) -> Result<Self> {
        let p = Self {
            v_nominal,
            droop_gain,
            inductance,
            capacitance,
            lpf_bandwidth,
        };
        p.validate()?;
        Ok(p)
    }

    /// The 200 V test system: `K = 0.2 Ω`, `L = 1 mH`, `C = 14 mF`, with the
    /// requested bandwidth.
    pub fn reference(lpf_bandwidth: Bandwidth) -> Self {
        Self {
            v_nominal: 200.0,
            droop_gain: 0.2,
            inductance: 1e-3,
            capacitance: 14e-3,
            lpf_bandwidth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("v_nominal", self.v_nominal)?;
        positive("droop_gain", self.droop_gain)?;
        positive("inductance", self.inductance)?;
        positive("capacitance", self.capacitance)?;
        if let Bandwidth::Finite(w) = self.lpf_bandwidth {
            positive("lpf_bandwidth", w)?;
        }
        Ok(())
    }

    pub fn with_capacitance(self, capacitance: f64) -> Self {
        Self {
            capacitance,
            ..self
        }
    }

    pub fn with_bandwidth(self, lpf_bandwidth: Bandwidth) -> Self {
        Self {
            lpf_bandwidth,
            ..self
        }
    }
}

/// Machine-emulation parameterization of virtual inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineEmulationParams {
    /// Emulated virtual inertia `C_v`.
    pub virtual_inertia: f64,
    /// Emulated damping factor `D_b` [1/Ω].
    pub damping_factor: f64,
    pub v_nominal: f64,
}

impl MachineEmulationParams {
    pub fn validate(&self) -> Result<()> {
        positive("virtual_inertia", self.virtual_inertia)?;
        positive("damping_factor", self.damping_factor)?;
        positive("v_nominal", self.v_nominal)?;
        Ok(())
    }
}

/// Maps machine-emulation parameters onto the equivalent `(ω, K)` of the LPF form.
pub fn equivalent_lpf(m: &MachineEmulationParams) -> Result<(f64, f64)> {
    m.validate()?;
    let omega = m.damping_factor / (m.virtual_inertia * m.v_nominal);
    let droop_gain = 1.0 / m.damping_factor;
    Ok((omega, droop_gain))
}

/// Inverse of [`equivalent_lpf`]: `D_b = 1/K`, `C_v = D_b / (ω V_n)`.
pub fn machine_from_lpf(
    omega: f64,
    droop_gain: f64,
    v_nominal: f64,
) -> Result<MachineEmulationParams> {
    positive("lpf_bandwidth", omega)?;
    positive("droop_gain", droop_gain)?;
    positive("v_nominal", v_nominal)?;
    let damping_factor = 1.0 / droop_gain;
    Ok(MachineEmulationParams {
        virtual_inertia: damping_factor / (omega * v_nominal),
        damping_factor,
        v_nominal,
    })
}

/// `P_max = V_n² / (4K)`, the largest CPL power with a droop equilibrium.
pub fn power_transfer_limit(p: &GridParams) -> Result<f64> {
    p.validate()?;
    Ok(p.v_nominal * p.v_nominal / (4.0 * p.droop_gain))
}

/// Steady-state operating point for a CPL of power `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Capacitor voltage `V_e` [V].
    pub v_cap: f64,
    /// Line current `I_e = P / V_e` [A].
    pub current: f64,
    /// Reference voltage; equals `V_e` since the inductor carries no DC drop.
    pub v_ref: f64,
    /// `R_e = V_e² / P` [Ω]; `+∞` at no load.
    #[serde(with = "serde_inf")]
    pub r_effective: f64,
    /// CPL power `P` [W].
    pub power: f64,
}

impl Equilibrium {
    pub fn is_loaded(&self) -> bool {
        self.power > 0.0
    }

    /// State vector `(v_ref, i, v)` at this operating point.
    pub fn state(&self) -> [f64; 3] {
        [self.v_ref, self.current, self.v_cap]
    }

    /// `|V_e − (V_n − K P / V_e)| ≤ tol · V_n`.
    pub fn satisfies_droop(&self, p: &GridParams, rel_tol: f64) -> bool {
        let rhs = p.v_nominal - p.droop_gain * self.power / self.v_cap;
        (self.v_cap - rhs).abs() <= rel_tol * p.v_nominal
    }
}

/// Equilibrium of the grid for a CPL of `power` watts.
///
/// The LPF bandwidth plays no role: the filter is transparent in steady state.
/// `power = P_max` is accepted and yields `V_e = V_n / 2`, `R_e = K`.
pub fn compute_equilibrium(p: &GridParams, power: f64) -> Result<Equilibrium> {
    let p_max = power_transfer_limit(p)?;
    if !power.is_finite() || power < 0.0 {
        return Err(Error::InvalidParameter {
            name: "power",
            value: power,
            reason: "CPL power must be finite and non-negative",
        });
    }
    if power > p_max {
        return Err(Error::NoEquilibrium { power, p_max });
    }
    let vn = p.v_nominal;
    let disc = (vn * vn - 4.0 * power * p.droop_gain).max(0.0);
    let v_cap = 0.5 * (vn + disc.sqrt());
    let (current, r_effective) = if power == 0.0 {
        (0.0, f64::INFINITY)
    } else {
        // R_e >= K holds exactly; the clamp only absorbs rounding at P = P_max.
        (power / v_cap, (v_cap * v_cap / power).max(p.droop_gain))
    };
    Ok(Equilibrium {
        v_cap,
        current,
        v_ref: v_cap,
        r_effective,
        power,
    })
}
