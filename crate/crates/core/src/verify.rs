//! Seeded randomized cross-checks of the three stability routes.
//!
//! Parameters are drawn from a fixed universe; the capacitance is redrawn
//! until it sits at least [`MARGIN`] (relative) away from every threshold, so
//! no sample lands in a marginal band.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::model::{compute_equilibrium, power_transfer_limit, Bandwidth, Equilibrium, GridParams};
use crate::stability::{
    capacitance_thresholds, char_poly, eigenvalues, logspace, routh_verdict, theorem1_proof_check,
    theorem1_stable,
};

/// Minimum relative distance between the sampled `C` and any threshold.
pub const MARGIN: f64 = 1e-3;

/// Residual tolerance for the eigenvalue oracle.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Closed sampling ranges. Decade-spanning quantities are drawn log-uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Universe {
    pub v_nominal: (f64, f64),
    pub droop_gain: (f64, f64),
    pub inductance: (f64, f64),
    pub capacitance: (f64, f64),
    pub omega: (f64, f64),
    /// Fraction of `P_max`.
    pub power_fraction: (f64, f64),
}

impl Default for Universe {
    fn default() -> Self {
        Self {
            v_nominal: (10.0, 1000.0),
            droop_gain: (0.01, 1.0),
            inductance: (10e-6, 10e-3),
            capacitance: (10e-6, 100e-3),
            omega: (1.0, 1e5),
            power_fraction: (0.01, 0.99),
        }
    }
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

impl Universe {
    /// One admissible operating point with `C` outside every marginal band.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Result<(GridParams, Equilibrium)> {
        loop {
            let mut p = GridParams {
                v_nominal: log_uniform(rng, self.v_nominal),
                droop_gain: log_uniform(rng, self.droop_gain),
                inductance: log_uniform(rng, self.inductance),
                capacitance: 1.0,
                lpf_bandwidth: Bandwidth::Finite(log_uniform(rng, self.omega)),
            };
            let frac = rng.gen_range(self.power_fraction.0..=self.power_fraction.1);
            let eq = compute_equilibrium(&p, frac * power_transfer_limit(&p)?)?;
            let t = capacitance_thresholds(&p, &eq)?;
            for _ in 0..64 {
                let c = log_uniform(rng, self.capacitance);
                if t.as_array()
                    .iter()
                    .all(|&th| (c - th).abs() > MARGIN * th.abs())
                {
                    p.capacitance = c;
                    return Ok((p, eq));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Disagreement {
    pub params: GridParams,
    pub power: f64,
    pub routh: bool,
    pub theorem: bool,
    pub eigen_max_re: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub seed: u64,
    pub samples: usize,
    pub stable_samples: usize,
    pub routh_vs_eigen: usize,
    pub theorem_vs_routh: usize,
    pub routh_vs_coefficients: usize,
    pub marginal: usize,
    pub ordering_violations: usize,
    pub residual_failures: usize,
    /// Up to ten offending samples, for diagnosis.
    pub examples: Vec<Disagreement>,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.routh_vs_eigen == 0
            && self.theorem_vs_routh == 0
            && self.routh_vs_coefficients == 0
            && self.marginal == 0
            && self.ordering_violations == 0
            && self.residual_failures == 0
    }
}

pub fn oracle_agreement(samples: usize, seed: u64, universe: &Universe) -> Result<AgreementReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = AgreementReport {
        seed,
        samples,
        stable_samples: 0,
        routh_vs_eigen: 0,
        theorem_vs_routh: 0,
        routh_vs_coefficients: 0,
        marginal: 0,
        ordering_violations: 0,
        residual_failures: 0,
        examples: Vec::new(),
    };
    for _ in 0..samples {
        let (p, eq) = universe.draw(&mut rng)?;
        let routh = routh_verdict(&p, &eq)?;
        let theorem = theorem1_stable(&p, &eq)?;
        let cp = char_poly(&p, &eq)?;
        let eig = eigenvalues(&cp);
        let eigen_stable = eig.max_real_part < 0.0;
        let t = capacitance_thresholds(&p, &eq)?;

        r.stable_samples += routh.stable as usize;
        r.marginal += routh.marginal as usize;
        r.ordering_violations += !t.ordered(1e-9) as usize;
        r.residual_failures += !eig.residuals_within(&cp, EIGEN_RESIDUAL_TOL) as usize;
        r.routh_vs_coefficients += (routh.stable != cp.hurwitz()) as usize;
        let bad_eig = routh.stable != eigen_stable;
        let bad_thm = theorem != routh.stable;
        r.routh_vs_eigen += bad_eig as usize;
        r.theorem_vs_routh += bad_thm as usize;
        if (bad_eig || bad_thm) && r.examples.len() < 10 {
            r.examples.push(Disagreement {
                params: p,
                power: eq.power,
                routh: routh.stable,
                theorem,
                eigen_max_re: eig.max_real_part,
            });
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProofSummary {
    pub cases: usize,
    pub tau_points_per_case: usize,
    pub tau_window: (f64, f64),
    pub violations: usize,
    pub min_g_over_tau: f64,
}

/// Runs the proof check on `cases` random operating points over a wide `τ` window.
pub fn proof_structure(cases: usize, seed: u64, universe: &Universe) -> Result<ProofSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let window = (1e-9, 1e3);
    let taus = logspace(window.0, window.1, 61);
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..cases {
        let (p, eq) = universe.draw(&mut rng)?;
        let rep = theorem1_proof_check(&p, &eq, &taus)?;
        violations += rep.violations.len();
        for s in &rep.samples {
            min_ratio = min_ratio.min(s.g / s.tau);
        }
    }
    Ok(ProofSummary {
        cases,
        tau_points_per_case: taus.len(),
        tau_window: window,
        violations,
        min_g_over_tau: min_ratio,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub universe: Universe,
    pub agreement: AgreementReport,
    pub proof: ProofSummary,
    pub passed: bool,
}

pub fn run_verify(samples: usize, seed: u64) -> Result<VerifyReport> {
    let universe = Universe::default();
    let agreement = oracle_agreement(samples, seed, &universe)?;
    let proof = proof_structure(samples.clamp(1, 1000), seed, &universe)?;
    let passed = agreement.passed() && proof.violations == 0;
    Ok(VerifyReport {
        universe,
        agreement,
        proof,
        passed,
    })
}
