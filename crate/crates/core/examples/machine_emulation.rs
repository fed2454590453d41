//! The machine-emulation form of virtual inertia and its LPF equivalent.

use vi_stab::model::{equivalent_lpf, Bandwidth, GridParams, MachineEmulationParams};
use vi_stab::sim::{simulate, Scenario};

fn main() -> vi_stab::Result<()> {
    let m = MachineEmulationParams {
        virtual_inertia: 3.5e-5,
        damping_factor: 5.0,
        v_nominal: 200.0,
    };
    let (omega, k) = equivalent_lpf(&m)?;
    println!(
        "C_v={} D_b={} -> omega={omega:.3} rad/s, K={k}",
        m.virtual_inertia, m.damping_factor
    );

    let params = GridParams {
        lpf_bandwidth: Bandwidth::Finite(omega),
        ..GridParams::reference(Bandwidth::Infinite)
    };
    let lpf = Scenario::step(params, 43e3, 45e3, 0.05, 0.5);
    let mut machine = lpf.clone();
    machine.machine = Some(m);

    let a = simulate(&lpf)?;
    let b = simulate(&machine)?;
    let max_diff = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x.v - y.v).abs())
        .fold(0.0, f64::max);
    println!(
        "LPF: {:?}, machine: {:?}, max |dv| = {max_diff:.3e} V",
        a.verdict, b.verdict
    );
    Ok(())
}
