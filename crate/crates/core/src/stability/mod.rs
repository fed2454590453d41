//! Linearized stability of the grid equilibrium.
//!
//! The Jacobian at an equilibrium with CPL incremental resistance `R_e` is
//!
//! ```text
//!     | -ω   -ωK    0        |
//! J = | 1/L   0    -1/L      |
//!     | 0     1/C   1/(R_e C)|
//! ```
//!
//! and Routh–Hurwitz on its characteristic cubic reduces to three scalar
//! conditions `f₂, f₁, f₀ > 0`. Read as conditions on `C`, they collapse to
//! the single requirement `C > C₀`, where `C₀` is the larger root of the
//! quadratic `f₀(C) = 0`. [`eigenvalues`] solves the cubic directly as an
//! independent check on both routes.

mod cubic;
mod proof;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bandwidth, Equilibrium, GridParams, DEFAULT_REL_TOL};

pub use cubic::solve as solve_cubic;
pub use proof::{
    g_prime_tau, g_tau, logspace, theorem1_proof_check, ProofCheckReport, ProofSample,
    ProofViolation,
};

pub type Matrix3 = [[f64; 3]; 3];

fn loaded_finite(p: &GridParams, eq: &Equilibrium) -> Result<f64> {
    p.validate()?;
    let omega = p.lpf_bandwidth.finite().ok_or(Error::InfiniteBandwidth)?;
    if !eq.is_loaded() || !eq.r_effective.is_finite() {
        return Err(Error::ZeroPower);
    }
    Ok(omega)
}

fn loaded(eq: &Equilibrium) -> Result<f64> {
    if !eq.is_loaded() || !eq.r_effective.is_finite() {
        return Err(Error::ZeroPower);
    }
    Ok(eq.r_effective)
}

/// Jacobian from raw constants, without validation.
pub fn jacobian_from(
    omega: f64,
    droop_gain: f64,
    inductance: f64,
    capacitance: f64,
    r_e: f64,
) -> Matrix3 {
    [
        [-omega, -omega * droop_gain, 0.0],
        [1.0 / inductance, 0.0, -1.0 / inductance],
        [0.0, 1.0 / capacitance, 1.0 / (r_e * capacitance)],
    ]
}

/// Jacobian of the state `(v_ref, i, v)` at `eq`. Requires a finite bandwidth and `P > 0`.
pub fn jacobian(p: &GridParams, eq: &Equilibrium) -> Result<Matrix3> {
    let omega = loaded_finite(p, eq)?;
    Ok(jacobian_from(
        omega,
        p.droop_gain,
        p.inductance,
        p.capacitance,
        eq.r_effective,
    ))
}

/// Monic characteristic cubic `λ³ + a₂λ² + a₁λ + a₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl CharPoly {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        cubic::eval(self.a2, self.a1, self.a0, z)
    }

    /// Routh–Hurwitz on the coefficients: `a₂ > 0`, `a₁ > 0`, `a₂a₁ − a₀ > 0`, `a₀ > 0`.
    pub fn hurwitz(&self) -> bool {
        self.a2 > 0.0 && self.a1 > 0.0 && self.a2 * self.a1 - self.a0 > 0.0 && self.a0 > 0.0
    }
}

pub fn char_poly(p: &GridParams, eq: &Equilibrium) -> Result<CharPoly> {
    let omega = loaded_finite(p, eq)?;
    let (k, l, c, re) = (p.droop_gain, p.inductance, p.capacitance, eq.r_effective);
    let lcr = l * c * re;
    Ok(CharPoly {
        a2: omega - 1.0 / (re * c),
        a1: (re + omega * k * c * re - omega * l) / lcr,
        a0: (omega * re - omega * k) / lcr,
    })
}

/// Values of the three stability expressions and the resulting verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouthVerdict {
    pub f2: f64,
    pub f1: f64,
    pub f0: f64,
    pub stable: bool,
    /// Some expression is zero within tolerance, or `R_e = K` (zero eigenvalue).
    /// Marginal points are never reported stable.
    pub marginal: bool,
}

/// `f₀(C) = ω²KC²R_e² − ω²LCR_e + ωL − R_e`.
pub fn f0(omega: f64, droop_gain: f64, inductance: f64, capacitance: f64, r_e: f64) -> f64 {
    let w2 = omega * omega;
    w2 * droop_gain * capacitance * capacitance * r_e * r_e - w2 * inductance * capacitance * r_e
        + omega * inductance
        - r_e
}

pub fn routh_verdict(p: &GridParams, eq: &Equilibrium) -> Result<RouthVerdict> {
    routh_verdict_with_tol(p, eq, DEFAULT_REL_TOL)
}

pub fn routh_verdict_with_tol(
    p: &GridParams,
    eq: &Equilibrium,
    rel_tol: f64,
) -> Result<RouthVerdict> {
    let omega = loaded_finite(p, eq)?;
    let (k, l, c, re) = (p.droop_gain, p.inductance, p.capacitance, eq.r_effective);

    let f2 = omega * re * c - 1.0;
    let f1 = re + omega * k * c * re - omega * l;
    let f0 = f0(omega, k, l, c, re);

    let w2 = omega * omega;
    let scale2 = omega * re * c + 1.0;
    let scale1 = re + omega * k * c * re + omega * l;
    let scale0 = w2 * k * c * c * re * re + w2 * l * c * re + omega * l + re;
    let marginal = f2.abs() <= rel_tol * scale2
        || f1.abs() <= rel_tol * scale1
        || f0.abs() <= rel_tol * scale0
        || re - k <= rel_tol * k;
    let stable = !marginal && f2 > 0.0 && f1 > 0.0 && f0 > 0.0;
    Ok(RouthVerdict {
        f2,
        f1,
        f0,
        stable,
        marginal,
    })
}

/// Capacitance bounds from the three stability expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `f₂ > 0 ⇔ C > C₂`.
    pub c2: f64,
    /// `f₁ > 0 ⇔ C > C₁`; negative when `ω < K/L`.
    pub c1: f64,
    /// Smaller root of `f₀(C) = 0`.
    pub c0_minus: f64,
    /// Larger root of `f₀(C) = 0`; the single stability requirement is `C > C₀`.
    pub c0: f64,
}

impl Thresholds {
    pub fn as_array(&self) -> [f64; 4] {
        [self.c2, self.c1, self.c0_minus, self.c0]
    }

    /// `C₀⁻ ≤ C₂ ≤ C₀` and `C₁ ≤ C₀`, each up to `rel_tol · C₀`.
    pub fn ordered(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.c0.abs();
        self.c0_minus <= self.c2 + slack && self.c2 <= self.c0 + slack && self.c1 <= self.c0 + slack
    }
}

/// `L² − 4K(L/ω − R_e/ω²)`, evaluated as `(L − 2K/ω)² + 4K(R_e − K)/ω²`, which is
/// non-negative whenever `R_e ≥ K`.
pub fn c0_discriminant(omega: f64, droop_gain: f64, inductance: f64, r_e: f64) -> f64 {
    let tau = 1.0 / omega;
    let d = inductance - 2.0 * droop_gain * tau;
    d * d + 4.0 * droop_gain * (r_e - droop_gain) * tau * tau
}

/// `C₀(ω)`. At `ω = ∞` this is the droop-only bound `L / (K R_e)`.
pub fn c0(omega: Bandwidth, droop_gain: f64, inductance: f64, r_e: f64) -> f64 {
    match omega {
        Bandwidth::Infinite => inductance / (droop_gain * r_e),
        Bandwidth::Finite(w) => {
            let disc = c0_discriminant(w, droop_gain, inductance, r_e).max(0.0);
            (inductance + disc.sqrt()) / (2.0 * droop_gain * r_e)
        }
    }
}

/// Thresholds from raw constants. At `ω = ∞` the limits are
/// `C₂ = 0`, `C₁ = C₀ = L/(K R_e)`, `C₀⁻ = 0`.
pub fn thresholds_from(
    omega: Bandwidth,
    droop_gain: f64,
    inductance: f64,
    r_e: f64,
) -> Result<Thresholds> {
    let (k, l) = (droop_gain, inductance);
    let base = l / (k * r_e);
    let Bandwidth::Finite(w) = omega else {
        return Ok(Thresholds {
            c2: 0.0,
            c1: base,
            c0_minus: 0.0,
            c0: base,
        });
    };
    let disc = c0_discriminant(w, k, l, r_e);
    if disc < 0.0 {
        return Err(Error::Invariant(format!(
            "negative C0 discriminant {disc:e} (R_e = {r_e} < K = {k}?)"
        )));
    }
    let c0 = (l + disc.sqrt()) / (2.0 * k * r_e);
    // Vieta: C0⁻ · C0 = (ωL − R_e) / (ω² K R_e²); avoids the cancellation in L − √disc.
    let c0_minus = (w * l - r_e) / (w * w * k * r_e * r_e * c0);
    let t = Thresholds {
        c2: 1.0 / (w * r_e),
        c1: l / (k * r_e) - 1.0 / (w * k),
        c0_minus,
        c0,
    };
    if !t.ordered(1e-9) {
        return Err(Error::Invariant(format!(
            "threshold ordering violated: {t:?}"
        )));
    }
    Ok(t)
}

/// Capacitance thresholds at `eq`. The capacitance in `p` is not used.
pub fn capacitance_thresholds(p: &GridParams, eq: &Equilibrium) -> Result<Thresholds> {
    p.validate()?;
    let re = loaded(eq)?;
    thresholds_from(p.lpf_bandwidth, p.droop_gain, p.inductance, re)
}

/// Single-constraint criterion: `C > C₀` at an interior equilibrium (`R_e > K`).
///
/// At `ω = ∞` this is the droop bound `C > L/(K R_e)`.
pub fn theorem1_stable(p: &GridParams, eq: &Equilibrium) -> Result<bool> {
    let t = capacitance_thresholds(p, eq)?;
    Ok(p.capacitance > t.c0 && eq.r_effective > p.droop_gain)
}

/// The three roots of a characteristic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub roots: [Complex64; 3],
    pub max_real_part: f64,
}

impl EigenTriple {
    /// Largest backward error `|p(λ)| / (|λ|³ + |a₂||λ|² + |a₁||λ| + |a₀|)` over the roots.
    pub fn max_residual(&self, cp: &CharPoly) -> f64 {
        self.roots
            .iter()
            .map(|&z| {
                let r = z.norm();
                let scale = ((r + cp.a2.abs()) * r + cp.a1.abs()) * r + cp.a0.abs();
                if scale == 0.0 {
                    0.0
                } else {
                    cp.eval(z).norm() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn residuals_within(&self, cp: &CharPoly, tol: f64) -> bool {
        self.max_residual(cp) <= tol
    }
}

pub fn eigenvalues(cp: &CharPoly) -> EigenTriple {
    let roots = cubic::solve(cp.a2, cp.a1, cp.a0);
    let max_real_part = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    EigenTriple {
        roots,
        max_real_part,
    }
}

/// Roots of the droop-only (`ω = ∞`) system, whose reduced Jacobian is
/// `[[−K/L, −1/L], [1/C, 1/(R_e C)]]`.
pub fn droop_eigenvalues(p: &GridParams, eq: &Equilibrium) -> Result<[Complex64; 2]> {
    p.validate()?;
    let re = loaded(eq)?;
    let (k, l, c) = (p.droop_gain, p.inductance, p.capacitance);
    let trace = -k / l + 1.0 / (re * c);
    let det = (re - k) / (l * c * re);
    let disc = Complex64::new(trace * trace - 4.0 * det, 0.0).sqrt();
    Ok([(disc + trace) * 0.5, (-disc + trace) * 0.5])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eig {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Eig {
    fn from(z: Complex64) -> Self {
        Eig { re: z.re, im: z.im }
    }
}

/// Verdict, thresholds and eigenvalues for one operating point.
///
/// With `ω = ∞` the `f` fields hold the leading-order limits `f₂/ω`, `f₁/ω`,
/// `f₀/ω²`, the thresholds hold their limits, and `eigs` carries the two
/// roots of the droop-only system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub marginal: bool,
    pub f2: f64,
    pub f1: f64,
    pub f0: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0_minus: f64,
    pub c0: f64,
    pub eigs: Vec<Eig>,
}

pub fn analyze(p: &GridParams, eq: &Equilibrium) -> Result<StabilityReport> {
    let t = capacitance_thresholds(p, eq)?;
    let (k, l, c, re) = (p.droop_gain, p.inductance, p.capacitance, eq.r_effective);
    match p.lpf_bandwidth {
        Bandwidth::Finite(_) => {
            let v = routh_verdict(p, eq)?;
            let e = eigenvalues(&char_poly(p, eq)?);
            Ok(StabilityReport {
                stable: v.stable,
                marginal: v.marginal,
                f2: v.f2,
                f1: v.f1,
                f0: v.f0,
                c2: t.c2,
                c1: t.c1,
                c0_minus: t.c0_minus,
                c0: t.c0,
                eigs: e.roots.iter().copied().map(Eig::from).collect(),
            })
        }
        Bandwidth::Infinite => {
            let f2 = re * c;
            let f1 = k * c * re - l;
            let f0 = c * (k * c * re - l);
            let tol = DEFAULT_REL_TOL;
            let marginal = f1.abs() <= tol * (k * c * re + l) || re - k <= tol * k;
            Ok(StabilityReport {
                stable: !marginal && f1 > 0.0,
                marginal,
                f2,
                f1,
                f0,
                c2: t.c2,
                c1: t.c1,
                c0_minus: t.c0_minus,
                c0: t.c0,
                eigs: droop_eigenvalues(p, eq)?
                    .iter()
                    .copied()
                    .map(Eig::from)
                    .collect(),
            })
        }
    }
}
