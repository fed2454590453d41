//! Time-domain behaviour against the linearized predictions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vi_stab::model::{
    compute_equilibrium, machine_from_lpf, power_transfer_limit, Bandwidth, GridParams,
};
use vi_stab::sim::{rk4_step, simulate, Scenario, Verdict};
use vi_stab::stability::{capacitance_thresholds, char_poly, eigenvalues, jacobian};

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Operating point and load with `C` placed at `factor · C₀`.
fn draw(rng: &mut ChaCha8Rng, factor: f64) -> (GridParams, f64) {
    let mut p = GridParams {
        v_nominal: log_uniform(rng, 100.0, 800.0),
        droop_gain: log_uniform(rng, 0.05, 0.5),
        inductance: log_uniform(rng, 1e-4, 5e-3),
        capacitance: 1.0,
        lpf_bandwidth: Bandwidth::Finite(log_uniform(rng, 50.0, 5000.0)),
    };
    let power = rng.gen_range(0.1..0.9) * power_transfer_limit(&p).unwrap();
    let eq = compute_equilibrium(&p, power).unwrap();
    p.capacitance = factor * capacitance_thresholds(&p, &eq).unwrap().c0;
    (p, power)
}

/// Step size resolving the fastest mode and a horizon covering `e_folds` of
/// the slowest one.
fn timing(p: &GridParams, power: f64, e_folds: f64) -> (f64, f64) {
    let eq = compute_equilibrium(p, power).unwrap();
    let e = eigenvalues(&char_poly(p, &eq).unwrap());
    let fastest = e.roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let slowest = e
        .roots
        .iter()
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    let dt = (0.01 / fastest).min(1e-5);
    (dt, e_folds / slowest)
}

fn perturbed(p: GridParams, power: f64, e_folds: f64) -> Scenario {
    let (dt, t_end) = timing(&p, power, e_folds);
    let mut s = Scenario::hold(p, power, t_end);
    s.dt = dt;
    s.decimation = 1000;
    s.initial_perturbation = 0.01;
    s
}

#[test]
fn linearization_predicts_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 0..100 {
        let factor = if n % 2 == 0 { 1.05 } else { 0.95 };
        let (p, power) = draw(&mut rng, factor);
        let tr = simulate(&perturbed(p, power, 8.0)).unwrap();
        if factor > 1.0 {
            assert_eq!(
                tr.verdict,
                Verdict::ConvergedToEquilibrium,
                "case {n}: {p:?} P={power} dev={}",
                tr.final_deviation
            );
            assert!(tr.final_deviation < 1e-3);
        } else {
            assert_ne!(
                tr.verdict,
                Verdict::ConvergedToEquilibrium,
                "case {n}: {p:?} P={power}"
            );
        }
    }
}

#[test]
fn equilibrium_independent_of_bandwidth() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (base, power) = draw(&mut rng, 1.5);
        let mut finals = Vec::new();
        for w in [200.0, 1000.0, 4000.0] {
            let p = base.with_bandwidth(Bandwidth::Finite(w));
            let eq = compute_equilibrium(&p, power).unwrap();
            let p = p.with_capacitance(1.5 * capacitance_thresholds(&p, &eq).unwrap().c0);
            let tr = simulate(&perturbed(p, power, 20.0)).unwrap();
            assert_eq!(tr.verdict, Verdict::ConvergedToEquilibrium);
            finals.push(tr.samples.last().unwrap().v);
        }
        let ve = compute_equilibrium(&base, power).unwrap().v_cap;
        for v in finals {
            assert!((v - ve).abs() <= 1e-6 * ve, "{v} vs {ve}");
        }
    }
}

#[test]
fn machine_emulation_trajectories_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let (p, power) = draw(&mut rng, 1.2);
        let w = p.lpf_bandwidth.finite().unwrap();
        let mut lpf = Scenario::hold(p, power, 0.01);
        lpf.initial_perturbation = 0.01;
        lpf.dt = 1e-6;
        let mut mach = lpf.clone();
        mach.machine = Some(machine_from_lpf(w, p.droop_gain, p.v_nominal).unwrap());
        let a = simulate(&lpf).unwrap();
        let b = simulate(&mach).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            for (u, v) in [(x.v_ref, y.v_ref), (x.i, y.i), (x.v, y.v)] {
                assert!(
                    (u - v).abs() <= 1e-12 * u.abs().max(v.abs()).max(1.0),
                    "{u} vs {v}"
                );
            }
        }
    }
}

/// Error of RK4 on `ẋ = J x` over `t_end` against the matrix exponential
/// computed by a much finer RK4 run.
fn linear_error(j: [[f64; 3]; 3], x0: [f64; 3], t_end: f64, dt: f64) -> f64 {
    let f = |_t: f64, x: &[f64; 3]| -> vi_stab::Result<[f64; 3]> {
        let mut d = [0.0; 3];
        for r in 0..3 {
            d[r] = (0..3).map(|c| j[r][c] * x[c]).sum();
        }
        Ok(d)
    };
    let run = |h: f64| {
        let n = (t_end / h).round() as usize;
        let mut x = x0;
        for k in 0..n {
            x = rk4_step(f, k as f64 * h, &x, h).unwrap();
        }
        x
    };
    let reference = run(dt / 64.0);
    let coarse = run(dt);
    (0..3)
        .map(|k| (coarse[k] - reference[k]).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn rk4_order_on_linearized_system() {
    let p = GridParams::reference(Bandwidth::Finite(716.0));
    let eq = compute_equilibrium(&p, 45_000.0).unwrap();
    let j = jacobian(&p, &eq).unwrap();
    let x0 = [0.5, 2.0, 1.0];
    let errs: Vec<f64> = [4e-4, 2e-4, 1e-4]
        .iter()
        .map(|&dt| linear_error(j, x0, 0.02, dt))
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (8.0..=32.0).contains(&ratio),
            "ratio {ratio} errors {errs:?}"
        );
    }
}

#[test]
fn halving_dt_keeps_verdicts() {
    let cases = [
        Scenario::step(
            GridParams::reference(Bandwidth::Finite(716.0)),
            43e3,
            45e3,
            0.1,
            0.5,
        ),
        {
            let mut s = Scenario::hold(GridParams::reference(Bandwidth::Finite(125.0)), 20e3, 0.5);
            s.initial_perturbation = 0.01;
            s
        },
    ];
    for s in cases {
        let mut s = s;
        s.dt = 2e-6;
        let coarse = simulate(&s).unwrap();
        s.dt = 1e-6;
        let fine = simulate(&s).unwrap();
        assert_eq!(coarse.verdict, fine.verdict);
    }
}
