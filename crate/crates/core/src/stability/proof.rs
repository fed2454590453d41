//! Numerical check of the argument that `C > C₀` subsumes the other two conditions.
//!
//! With `τ = 1/ω`, `g(τ) = C₀(τ) − C₁(τ)` must be strictly positive on
//! `τ > 0`, and `f₀(C₂) = K − R_e ≤ 0` places `C₂` between the two roots of
//! `f₀`. Both are sampled here; violations are collected rather than raised.

use serde::Serialize;

use super::{f0, thresholds_from, Thresholds};
use crate::error::{Error, Result};
use crate::model::{Bandwidth, Equilibrium, GridParams};

/// `g(τ) = (L + √(L² − 4K(Lτ − R_eτ²))) / (2KR_e) + τ/K − L/(KR_e)`.
pub fn g_tau(tau: f64, droop_gain: f64, inductance: f64, r_e: f64) -> f64 {
    let (k, l) = (droop_gain, inductance);
    let disc = l * l - 4.0 * k * (l * tau - r_e * tau * tau);
    (l + disc.max(0.0).sqrt()) / (2.0 * k * r_e) + tau / k - l / (k * r_e)
}

/// `g′(τ) = (2τR_e − L) / (R_e √(L² − 4K(Lτ − R_eτ²))) + 1/K`.
pub fn g_prime_tau(tau: f64, droop_gain: f64, inductance: f64, r_e: f64) -> f64 {
    let (k, l) = (droop_gain, inductance);
    let disc = l * l - 4.0 * k * (l * tau - r_e * tau * tau);
    (2.0 * tau * r_e - l) / (r_e * disc.sqrt()) + 1.0 / k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProofSample {
    pub tau: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0_minus: f64,
    pub c0: f64,
    pub g: f64,
    pub g_prime: f64,
    pub f0_at_c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProofViolation {
    /// `g(τ) ≤ 0` at a sampled `τ > 0`.
    GNotPositive {
        tau: f64,
        g: f64,
    },
    /// `C₀ − C₁` from the thresholds disagrees with `g(τ)`.
    GMismatch {
        tau: f64,
        g: f64,
        c0_minus_c1: f64,
    },
    /// `f₀(C₂)` is positive or differs from `K − R_e`.
    F0AtC2 {
        tau: f64,
        value: f64,
        expected: f64,
    },
    Ordering {
        tau: f64,
        thresholds: [f64; 4],
    },
    GAtZero {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofCheckReport {
    pub droop_gain: f64,
    pub inductance: f64,
    pub r_effective: f64,
    /// `g(0)`, expected to be `0`.
    pub g_at_zero: f64,
    /// `g′(0)`, expected to be `1/K − 1/R_e ≥ 0`.
    pub g_prime_at_zero: f64,
    /// `K − R_e`.
    pub k_minus_re: f64,
    pub samples: Vec<ProofSample>,
    pub violations: Vec<ProofViolation>,
}

impl ProofCheckReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&ProofViolation> {
        self.violations.first()
    }
}

/// Samples the proof quantities at each `τ` in `tau_samples` (all must be `> 0`).
/// The capacitance in `p` is not used.
pub fn theorem1_proof_check(
    p: &GridParams,
    eq: &Equilibrium,
    tau_samples: &[f64],
) -> Result<ProofCheckReport> {
    p.validate()?;
    if !eq.is_loaded() || !eq.r_effective.is_finite() {
        return Err(Error::ZeroPower);
    }
    if let Some(&bad) = tau_samples.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: bad,
            reason: "tau samples must be finite and positive",
        });
    }
    let (k, l, re) = (p.droop_gain, p.inductance, eq.r_effective);
    let base = l / (k * re);
    let tol = 1e-9;

    let mut violations = Vec::new();
    let g_at_zero = g_tau(0.0, k, l, re);
    if g_at_zero.abs() > tol * base {
        violations.push(ProofViolation::GAtZero { value: g_at_zero });
    }

    let samples = tau_samples
        .iter()
        .map(|&tau| {
            let omega = 1.0 / tau;
            let t: Thresholds = thresholds_from(Bandwidth::Finite(omega), k, l, re)?;
            let g = g_tau(tau, k, l, re);
            let g_prime = g_prime_tau(tau, k, l, re);
            let f0_at_c2 = f0(omega, k, l, t.c2, re);

            if g <= 0.0 {
                violations.push(ProofViolation::GNotPositive { tau, g });
            }
            let diff = t.c0 - t.c1;
            if (diff - g).abs() > tol * (t.c0.abs() + t.c1.abs()) {
                violations.push(ProofViolation::GMismatch {
                    tau,
                    g,
                    c0_minus_c1: diff,
                });
            }
            let expected = k - re;
            let f0_scale = tol * (re + omega * l);
            if f0_at_c2 > f0_scale || (f0_at_c2 - expected).abs() > f0_scale {
                violations.push(ProofViolation::F0AtC2 {
                    tau,
                    value: f0_at_c2,
                    expected,
                });
            }
            if !t.ordered(tol) {
                violations.push(ProofViolation::Ordering {
                    tau,
                    thresholds: t.as_array(),
                });
            }
            Ok(ProofSample {
                tau,
                c2: t.c2,
                c1: t.c1,
                c0_minus: t.c0_minus,
                c0: t.c0,
                g,
                g_prime,
                f0_at_c2,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ProofCheckReport {
        droop_gain: k,
        inductance: l,
        r_effective: re,
        g_at_zero,
        g_prime_at_zero: g_prime_tau(0.0, k, l, re),
        k_minus_re: k - re,
        samples,
        violations,
    })
}

/// `n` log-spaced points between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
