//! Sizing of virtual inertia against the DC bus capacitance.
//!
//! `C₀(ω)` falls on `(0, 2R_e/L)` and rises on `(2R_e/L, ∞)` towards the
//! droop-only requirement `C_base = L/(K R_e)`. The minimum `C_opt` sits at
//! `ω_opt = 2R_e/L`, and `ω_max = R_e/L` is the lowest bandwidth (largest
//! inertia) the baseline capacitance still supports.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::model::{Bandwidth, Equilibrium};
use crate::stability::c0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaDesign {
    /// Capacitance required without virtual inertia [F].
    pub c_base: f64,
    /// Bandwidth minimizing the required capacitance [rad/s].
    pub omega_opt: f64,
    /// `C₀(ω_opt)` [F].
    pub c_opt: f64,
    /// Lowest bandwidth stable at `c_base` [rad/s].
    pub omega_max: f64,
    #[serde(skip)]
    droop_gain: f64,
    #[serde(skip)]
    r_effective: f64,
}

impl InertiaDesign {
    /// Large-inertia approximation `1/(ω √(K R_e))` for this operating point.
    pub fn c_large(&self, omega: f64) -> f64 {
        large_inertia_capacitance(omega, self.droop_gain, self.r_effective)
    }
}

pub fn design_for(eq: &Equilibrium, inductance: f64, droop_gain: f64) -> Result<InertiaDesign> {
    positive("inductance", inductance)?;
    positive("droop_gain", droop_gain)?;
    if !eq.is_loaded() || !eq.r_effective.is_finite() {
        return Err(Error::ZeroPower);
    }
    let (l, k, re) = (inductance, droop_gain, eq.r_effective);
    let c_base = l / (k * re);
    let omega_opt = 2.0 * re / l;
    let c_opt = l * (1.0 + (1.0 - k / re).max(0.0).sqrt()) / (2.0 * k * re);
    let omega_max = re / l;

    let tol = 1e-9;
    if c_opt > c_base * (1.0 + tol) {
        return Err(Error::Invariant(format!(
            "c_opt {c_opt} exceeds c_base {c_base}"
        )));
    }
    let at_max = c0(Bandwidth::Finite(omega_max), k, l, re);
    if (at_max - c_base).abs() > tol * c_base {
        return Err(Error::Invariant(format!(
            "C0(omega_max) = {at_max} != c_base = {c_base}"
        )));
    }
    let at_opt = c0(Bandwidth::Finite(omega_opt), k, l, re);
    if (at_opt - c_opt).abs() > tol * c_base {
        return Err(Error::Invariant(format!(
            "C0(omega_opt) = {at_opt} != c_opt = {c_opt}"
        )));
    }
    Ok(InertiaDesign {
        c_base,
        omega_opt,
        c_opt,
        omega_max,
        droop_gain: k,
        r_effective: re,
    })
}

/// `1/(ω √(K R_e))`: the leading term of `C₀` as `ω → 0`.
///
/// An approximation only; pair it with [`approximation_error`] or the exact
/// `C₀`. It tends to zero as `ω → ∞`, where it is meaningless.
pub fn large_inertia_capacitance(omega: f64, droop_gain: f64, r_e: f64) -> f64 {
    1.0 / (omega * (droop_gain * r_e).sqrt())
}

/// Relative error `(C_large − C₀) / C₀` of the large-inertia approximation.
pub fn approximation_error(omega: f64, droop_gain: f64, inductance: f64, r_e: f64) -> f64 {
    let exact = c0(Bandwidth::Finite(omega), droop_gain, inductance, r_e);
    (large_inertia_capacitance(omega, droop_gain, r_e) - exact) / exact
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_equilibrium, GridParams};

    fn reference() -> (Equilibrium, InertiaDesign) {
        let p = GridParams::reference(Bandwidth::Infinite);
        let eq = compute_equilibrium(&p, 46_000.0).unwrap();
        let d = design_for(&eq, p.inductance, p.droop_gain).unwrap();
        (eq, d)
    }

    #[test]
    fn reference_design() {
        let (_, d) = reference();
        assert!((d.c_base - 14e-3).abs() / 14e-3 < 1e-2, "{}", d.c_base);
        assert!((715.0..=716.0).contains(&d.omega_opt), "{}", d.omega_opt);
        assert!((d.c_opt - 11.6e-3).abs() / 11.6e-3 < 1e-2, "{}", d.c_opt);
        assert!((357.0..=358.0).contains(&d.omega_max), "{}", d.omega_max);
        assert_eq!(d.omega_max * 2.0, d.omega_opt);
    }

    #[test]
    fn at_transfer_limit_c_opt_is_half_base() {
        let p = GridParams::reference(Bandwidth::Infinite);
        let eq = compute_equilibrium(&p, 50_000.0).unwrap();
        let d = design_for(&eq, p.inductance, p.droop_gain).unwrap();
        assert!((d.c_opt - d.c_base / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_no_load() {
        let p = GridParams::reference(Bandwidth::Infinite);
        let eq = compute_equilibrium(&p, 0.0).unwrap();
        assert!(matches!(
            design_for(&eq, p.inductance, p.droop_gain),
            Err(Error::ZeroPower)
        ));
    }

    #[test]
    fn large_inertia_examples() {
        let (eq, d) = reference();
        let approx = d.c_large(125.0);
        assert!((approx - 29.9e-3).abs() < 0.1e-3, "{approx}");
        let err = approximation_error(125.0, 0.2, 1e-3, eq.r_effective);
        assert!(err < 0.0 && err.abs() < 0.07, "{err}");
        assert!(d.c_large(1e30) < 1e-28);
        assert!((d.c_large(62.5) - 2.0 * approx).abs() < 1e-15);
    }

    #[test]
    fn json_keys() {
        let (_, d) = reference();
        let v = serde_json::to_value(d).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["c_base", "c_opt", "omega_max", "omega_opt"]);
    }
}
